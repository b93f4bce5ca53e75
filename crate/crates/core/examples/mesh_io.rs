//! Mesh and landmark file round trips: OBJ, ASCII PLY, binary PLY and the
//! seven-point landmark text format.

use facebench::geometry::{load_mesh_auto, save_mesh, MeshFormat};
use facebench::synth::{make_model, make_subject, SynthConfig};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let cfg = SynthConfig::default();
    let model = make_model(&cfg)?;
    let subject = make_subject(&model, &cfg, 7)?;
    let dir = std::env::temp_dir().join("facebench-mesh-io");
    std::fs::create_dir_all(&dir)?;

    for (name, format) in [
        ("scan.obj", MeshFormat::Obj),
        ("scan.ply", MeshFormat::Ply),
        ("scan_bin.ply", MeshFormat::PlyBinary),
    ] {
        let path = dir.join(name);
        save_mesh(&subject.mesh, &path, format)?;
        let back = load_mesh_auto(&path)?;
        let bytes = std::fs::metadata(&path)?.len();
        println!("{name:<13} {bytes:>7} bytes, identical after reload: {}", back == subject.mesh);
    }

    let lm_path = dir.join("scan.landmarks.txt");
    subject.landmarks.save(&lm_path)?;
    print!("{}", std::fs::read_to_string(&lm_path)?);
    Ok(())
}
