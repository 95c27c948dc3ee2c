//! Named scenarios, one per sign/power regime that fits a desktop run.

use crate::config::{parse_flat, ConfigError, FlatConfig, RunConfig};

pub struct Preset {
    pub name: &'static str,
    pub summary: &'static str,
    pub toml: &'static str,
}

pub const PRESETS: &[Preset] = &[
    Preset {
        name: "defocusing-cubic-quintic-3d",
        summary: "lambda1 = lambda2 = 1, p = 2, 4; small Gaussian, scattering certificate by t = 11.5",
        toml: r#"
name = "defocusing-cubic-quintic-3d"

[grid]
dim = 3
length = 64.0
points = 64

[nonlinearity]
lambda1 = 1.0
p1 = 2.0
lambda2 = 1.0
p2 = 4.0

[time]
t_end = 11.5
dt = 0.02
snapshot_spacing = 0.1

[initial_data]
profile = "gaussian"
amplitude = 0.06
width = 3.0

[diagnostics]
checkpoint_spacing = 0.5
cauchy_lag = 5.0
cauchy_start = 5.0
cauchy_threshold = 1e-3
decay_window = [5.0, 11.5]
"#,
    },
    Preset {
        name: "glassey-case1",
        summary: "lambda1 = 1, lambda2 = -1; chirped Gaussian with E < 0 and y0 > 0",
        toml: r#"
name = "glassey-case1"

[grid]
dim = 3
length = 8.0
points = 64

[nonlinearity]
lambda1 = 1.0
p1 = 2.0
lambda2 = -1.0
p2 = 4.0

[time]
t_end = 0.1
dt_init = 1e-3
dt_min = 1e-6
dt_max = 1e-2
accuracy_target = 1e-5
snapshot_spacing = 1e-3
blowup_growth = 1.25

[initial_data]
profile = "chirped-gaussian"
amplitude = 2.7
width = 1.0
chirp = -0.05

[diagnostics]
morawetz = false
scattering = false
"#,
    },
    Preset {
        name: "glassey-case2",
        summary: "lambda1 = lambda2 = -1, p1 = 2 above 4/n; E < 0 and y0 > 0",
        toml: r#"
name = "glassey-case2"

[grid]
dim = 3
length = 8.0
points = 64

[nonlinearity]
lambda1 = -1.0
p1 = 2.0
lambda2 = -1.0
p2 = 4.0

[time]
t_end = 0.1
dt_init = 1e-3
dt_min = 1e-6
dt_max = 1e-2
accuracy_target = 1e-5
snapshot_spacing = 1e-3
blowup_growth = 1.25

[initial_data]
profile = "chirped-gaussian"
amplitude = 2.7
width = 1.0
chirp = -0.05

[diagnostics]
morawetz = false
scattering = false
"#,
    },
    Preset {
        name: "glassey-case3",
        summary: "lambda1 = -0.2, p1 = 1 below 4/n, lambda2 = -1; E + CM < 0 and y0 > 0",
        toml: r#"
name = "glassey-case3"

[grid]
dim = 3
length = 8.0
points = 64

[nonlinearity]
lambda1 = -0.2
p1 = 1.0
lambda2 = -1.0
p2 = 4.0

[time]
t_end = 0.1
dt_init = 1e-3
dt_min = 1e-6
dt_max = 1e-2
accuracy_target = 1e-5
snapshot_spacing = 1e-3
blowup_growth = 1.25

[initial_data]
profile = "chirped-gaussian"
amplitude = 2.7
width = 1.0
chirp = -0.05

[diagnostics]
morawetz = false
scattering = false
"#,
    },
    Preset {
        name: "decay-p1-2-3d",
        summary: "defocusing p = 2, 4 on a 128^3 box; potential-energy decay over [5, 40]",
        toml: r#"
name = "decay-p1-2-3d"

[grid]
dim = 3
length = 200.0
points = 128

[nonlinearity]
lambda1 = 1.0
p1 = 2.0
lambda2 = 1.0
p2 = 4.0

[time]
t_end = 40.0
dt = 0.1
snapshot_spacing = 0.5

[initial_data]
profile = "gaussian"
amplitude = 0.4
width = 4.6

[diagnostics]
morawetz = false
scattering = false
decay_window = [5.0, 40.0]
"#,
    },
    Preset {
        name: "decay-p1-1-3d",
        summary: "defocusing p = 1, 4 on a 128^3 box; potential-energy decay over [5, 40]",
        toml: r#"
name = "decay-p1-1-3d"

[grid]
dim = 3
length = 200.0
points = 128

[nonlinearity]
lambda1 = 1.0
p1 = 1.0
lambda2 = 1.0
p2 = 4.0

[time]
t_end = 40.0
dt = 0.1
snapshot_spacing = 0.5

[initial_data]
profile = "gaussian"
amplitude = 0.05
width = 3.1

[diagnostics]
morawetz = false
scattering = false
decay_window = [5.0, 40.0]
"#,
    },
    Preset {
        name: "defocusing-mass-critical-3d",
        summary: "lambda1 = lambda2 = 1, p1 = 4/3 (mass-critical lower power)",
        toml: r#"
name = "defocusing-mass-critical-3d"
note = "conditional: global theory at p1 = 4/n is assumed, not proven; the classification reports measurements only"

[grid]
dim = 3
length = 64.0
points = 64

[nonlinearity]
lambda1 = 1.0
p1 = 1.3333333333333333
lambda2 = 1.0
p2 = 4.0

[time]
t_end = 10.0
dt = 0.02
snapshot_spacing = 0.1

[initial_data]
profile = "gaussian"
amplitude = 0.06
width = 3.0

[diagnostics]
decay_window = [5.0, 10.0]
"#,
    },
    Preset {
        name: "small-mass-mixed-3d",
        summary: "lambda1 = -1, p1 = 2, lambda2 = 1, p2 = 4; small mass",
        toml: r#"
name = "small-mass-mixed-3d"

[grid]
dim = 3
length = 64.0
points = 64

[nonlinearity]
lambda1 = -1.0
p1 = 2.0
lambda2 = 1.0
p2 = 4.0

[time]
t_end = 10.0
dt = 0.02
snapshot_spacing = 0.1

[initial_data]
profile = "gaussian"
amplitude = 0.06
width = 3.0

[diagnostics]
morawetz = false
decay_window = [5.0, 10.0]
"#,
    },
    Preset {
        name: "sigma-scattering-3d",
        summary: "defocusing p = 2, 4 with chirped data; pseudoconformal energy and Sigma distances",
        toml: r#"
name = "sigma-scattering-3d"

[grid]
dim = 3
length = 64.0
points = 64

[nonlinearity]
lambda1 = 1.0
p1 = 2.0
lambda2 = 1.0
p2 = 4.0

[time]
t_end = 8.0
dt = 0.02
snapshot_spacing = 0.1

[initial_data]
profile = "chirped-gaussian"
amplitude = 0.3
width = 3.0
chirp = 0.02

[diagnostics]
morawetz = false
checkpoint_spacing = 0.5
cauchy_lag = 2.0
cauchy_start = 2.0
decay_window = [2.0, 8.0]
"#,
    },
    Preset {
        name: "focusing-subcritical-3d",
        summary: "lambda1 = -1, p1 = 1 below 4/n, lambda2 = 1, p2 = 4; global and bounded",
        toml: r#"
name = "focusing-subcritical-3d"

[grid]
dim = 3
length = 32.0
points = 64

[nonlinearity]
lambda1 = -1.0
p1 = 1.0
lambda2 = 1.0
p2 = 4.0

[time]
t_end = 2.0
dt = 2e-3
snapshot_spacing = 0.02

[initial_data]
profile = "gaussian"
amplitude = 1.0
width = 1.5

[diagnostics]
morawetz = false
scattering = false
"#,
    },
];

pub fn find(name: &str) -> Option<&'static Preset> {
    PRESETS.iter().find(|p| p.name == name)
}

impl Preset {
    pub fn flat(&self) -> FlatConfig {
        parse_flat(self.toml).expect("preset TOML is valid")
    }

    pub fn config(&self) -> Result<RunConfig, ConfigError> {
        crate::config::from_flat(&self.flat())
    }
}
