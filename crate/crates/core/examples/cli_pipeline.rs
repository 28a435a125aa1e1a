//! Drives the command-line front end in-process: render a scene, segment a
//! frame, then measure its first segment.

use fundus_pulse::cli::run;

fn main() {
    let tmp = std::env::temp_dir().join(format!("fundus-pulse-demo-{}", std::process::id()));
    std::fs::create_dir_all(&tmp).expect("temp dir");
    let scene = tmp.join("scene.ini");
    std::fs::write(&scene, "[scene]\nduration = 0\nnoise_sigma = 3\n\n[vessel]\npoints = 30,60; 226,90\nwidth = 9\nintensity = 75\n")
        .expect("write scene");
    let p = |x: &std::path::Path| x.to_string_lossy().into_owned();
    let synth = tmp.join("synth");
    let frame = synth.join("frames").join("frame_0000.png");
    let steps: [Vec<String>; 3] = [
        vec!["synth".into(), p(&scene), "-o".into(), p(&synth)],
        vec!["segment".into(), p(&frame), "-o".into(), p(&tmp.join("seg"))],
        vec!["measure".into(), p(&frame), "--segment".into(), "1".into(), "-o".into(), p(&tmp.join("measure"))],
    ];
    for args in steps {
        let code = run(std::iter::once("fundus-pulse".to_string()).chain(args.iter().cloned()));
        println!("{} -> exit {code}", args[0]);
    }
    println!("outputs under {}", tmp.display());
}
