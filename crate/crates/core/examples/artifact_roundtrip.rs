//! Save a compiled matcher, load it back and show that scans agree.

use bouma2::{CompiledMatcher, Compiler, CostFunction, PatternSet};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let ps = PatternSet::new(["herd", "herbal", "upper", "deeper", "error", "ferrarri", "herd"])?;
    let cm = Compiler::new(CostFunction::rare_in_strings()).compile(&ps)?;

    let dir = std::env::temp_dir().join(format!("b2-example-{}", std::process::id()));
    std::fs::create_dir_all(&dir)?;
    let path = dir.join("example.b2");
    cm.save(&path)?;
    let loaded = CompiledMatcher::load(&path)?;
    println!("{}: {} bytes", path.display(), std::fs::metadata(&path)?.len());

    let input = b"herds of ferrarri cross the upper herbal field";
    assert_eq!(loaded.scan(input), cm.scan(input));
    for m in loaded.scan(input) {
        println!("{:>3} id {} len {}", m.start, m.pattern_id, m.len);
    }

    let mut bytes = loaded.to_bytes();
    bytes[4] = 9;
    println!("after corrupting the version: {}", CompiledMatcher::from_bytes(&bytes).unwrap_err());
    std::fs::remove_dir_all(&dir)?;
    Ok(())
}
