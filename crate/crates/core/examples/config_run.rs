// Drives the config front end the way `magbill run` does: parse each
// bundled config, run it into a scratch directory and print the manifest.

use std::path::Path;

use magbill::cli::{load_config, run};

fn main() {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("examples/configs");
    let out = std::env::temp_dir().join(format!("magbill-config-run-{}", std::process::id()));
    let mut names: Vec<_> = std::fs::read_dir(&dir)
        .unwrap()
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "cfg"))
        .collect();
    names.sort();
    for path in names {
        let cfg = load_config(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
        let target = out.join(path.file_stem().unwrap());
        let manifest = run(&cfg, Some(&target)).unwrap();
        println!("== {} ->  {}", path.display(), target.display());
        print!("{}", manifest.render());
        assert!(manifest.passed(), "{} failed", path.display());
    }
    let _ = std::fs::remove_dir_all(&out);
}
