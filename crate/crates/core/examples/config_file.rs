//! Loads run settings from an INI document and shows how invalid values
//! are reported.

use fundus_pulse::config::RunConfig;

fn main() {
    let text = "
[segmentation]
global_threshold = 10   # default 8
[caliper]
width_mode = total_count
[pulse]
fps = 25
heart_rate_formula = period=sep
";
    let cfg = RunConfig::from_ini(text).expect("valid settings");
    println!("threshold {}", cfg.segmentation.global_threshold);
    println!("width mode {}", cfg.caliper.width_mode);
    println!("fps {} formula {}", cfg.fps, cfg.heart_rate_formula);

    for bad in ["[segmentation]\nmedian_size = 4\n", "[pulse]\nlowpass_hz = 20\n", "[nope]\nx = 1\n", "key before section\n"] {
        match RunConfig::from_ini(bad) {
            Ok(_) => println!("accepted {bad:?}"),
            Err(e) => println!("rejected: {e}"),
        }
    }
    println!("\nfull settings:\n{}", RunConfig::default().to_ini());
}
