//! Built-in experiments.

use crate::config::{ConfigError, ExperimentConfig};

pub const NAMES: [&str; 4] = ["double-integrator", "scalar-unstable", "statedep-2d", "patchwork-halfplanes"];

const DOUBLE_INTEGRATOR: &str = r#"
seed = 1

[system]
kind = "integrator"
vars = ["x", "y"]
map = ["y"]

[controller]
kind = "zero"

[partition]
h = 0.1

[simulate]
initial = [[1.0, 0.0]]
horizon = 5.0
lyapunov = "x^2/2 + y^2/2"

[check_lie]
n_max = 4
grid = { lo = [-2.0, -2.0], hi = [2.0, 2.0], points = 41 }

[[check_lie.pieces]]
v = "x^2/2"
region = "x*y < 0 && y^2 < x^2"

[[check_lie.pieces]]
v = "x^2/2 + y^2/2"
region = "x*y > 0 || y^2 > x^2"

[check_lie.integrator]
v = "x^2/2"
w = "y^2/2"
d1 = "x*y < 0 && y^2 < x^2"
d2 = "x*y > 0 || y^2 > x^2"
"#;

const SCALAR_UNSTABLE: &str = r#"
seed = 1

[system]
kind = "state-linear"
vars = ["x1"]
a = [["1"]]
b = [["1"]]

[controller]
kind = "frozen-gain"

[partition]
h = 0.1

[simulate]
initial = [[1.0]]
horizon = 5.0
threshold = 1e-3
lyapunov = "per-sample"

[synthesize]
points = [[0.0], [1.0]]
radius = 2.0
samples = 50
"#;

const STATEDEP_2D: &str = r#"
seed = 1

[system]
kind = "state-linear"
vars = ["x1", "x2"]
a = [["0", "1"], ["sin(x1)", "x2^2"]]
b = [["0"], ["1"]]

[controller]
kind = "frozen-gain"

[partition]
h = 0.05

[simulate]
initial = [[2.0, -1.0], [-1.5, 1.5], [0.5, 2.0]]
horizon = 10.0
threshold = 1e-2
lyapunov = "per-sample"

[synthesize]
points = [[0.0, 0.0], [2.0, -1.0]]
radius = 2.0
samples = 200
"#;

const PATCHWORK_HALFPLANES: &str = r#"
seed = 1

[system]
kind = "state-linear"
vars = ["x1", "x2"]
a = [["0", "0"], ["0", "0"]]
b = [["1", "0"], ["0", "1"]]

[controller]
kind = "patchwork"
pieces = [["-x1", "-x2"], ["-x1", "-x2"]]

[partition]
h = 0.1

[simulate]
initial = [[1.0, 0.5], [-1.0, -1.0], [0.0, 1.0]]
horizon = 10.0
threshold = 1e-3
lyapunov = "patchwork"

[patchwork]
lo = [-3.0, -3.0]
hi = [3.0, 3.0]
radius = 2.0
samples = 10000

[[patchwork.pieces]]
v = "x1^2 + x2^2"
region = "x1 > 0"
omega1 = [1.0, 2.0]
omega2 = [1.0, 2.0]

[[patchwork.pieces]]
v = "x1^2 + x2^2"
region = "x1 < 0"
omega1 = [1.0, 2.0]
omega2 = [1.0, 2.0]
"#;

/// Complete configuration of a built-in experiment.
pub fn example(name: &str) -> Result<ExperimentConfig, ConfigError> {
    let text = match name {
        "double-integrator" => DOUBLE_INTEGRATOR,
        "scalar-unstable" => SCALAR_UNSTABLE,
        "statedep-2d" => STATEDEP_2D,
        "patchwork-halfplanes" => PATCHWORK_HALFPLANES,
        _ => return Err(ConfigError::UnknownExample(name.to_string())),
    };
    Ok(toml::from_str(text)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn all_entries_parse() {
        for name in NAMES {
            let cfg = example(name).unwrap();
            assert!(cfg.system.is_some(), "{name}");
        }
    }
}
