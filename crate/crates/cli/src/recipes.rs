//! Canned configurations. Each one is a complete config file.

pub struct Recipe {
    pub name: &'static str,
    pub about: &'static str,
    pub toml: &'static str,
}

pub const RECIPES: &[Recipe] = &[
    Recipe {
        name: "fig1",
        about: "discrete-time speeds against p at rho = 0.8",
        toml: r#"[run]
seed = 20240101
output_dir = "fig1"

[sweep.fig1]
kind = "speed-vs-p"
rho = 0.8
p_values = [0.55, 0.65, 0.75, 0.85, 0.95]
replicas = 1000
steps = 10000
"#,
    },
    Recipe {
        name: "fig2",
        about: "discrete-time speeds against rho at p = 0.7",
        toml: r#"[run]
seed = 20240102
output_dir = "fig2"

[sweep.fig2]
kind = "speed-vs-rho"
p = 0.7
rho_values = [0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9]
replicas = 1000
steps = 10000
"#,
    },
    Recipe {
        name: "static-speed",
        about: "continuous-time speed in a frozen Bernoulli environment",
        toml: r#"[run]
seed = 7

[sweep.static_speed]
kind = "speed"
env = "frozen"
rho = 0.8
alpha = 7.0
beta = 3.0
horizons = [1000.0, 3000.0, 10000.0]
replicas = 1000
"#,
    },
    Recipe {
        name: "rates",
        about: "annealed upper-deviation rates on exclusion",
        toml: r#"[run]
seed = 11

[sweep.upper_rates]
kind = "rate-grid"
mode = "annealed"
env = "sse"
rho = 0.5
alpha = 2.0
beta = 1.0
thetas = [0.5, 1.0, 1.5, 2.0]
horizons = [2.0, 4.0, 8.0]
replicas = 100000
"#,
    },
    Recipe {
        name: "quenched",
        about: "quenched point rates on independent flips, several environments",
        toml: r#"[run]
seed = 13

[sweep.quenched_rates]
kind = "rate-grid"
mode = "quenched"
env = "spinflip"
flip = "independent"
gamma = 1.0
rho = 0.8
alpha = 7.0
beta = 3.0
thetas = [-0.5, 0.5]
horizons = [5.0, 10.0, 20.0]
replicas = 100000
env_seeds = [1, 2, 3]
"#,
    },
    Recipe {
        name: "slowdown",
        about: "cost of staying near the origin on exclusion",
        toml: r#"[run]
seed = 17

[sweep.slowdown]
kind = "slowdown"
env = "sse"
rho = 0.8
alpha = 7.0
beta = 3.0
horizons = [250.0, 500.0, 1000.0, 2000.0]
replicas = 1000
"#,
    },
    Recipe {
        name: "traffic-jam",
        about: "survival of a vacant block against the range bound",
        toml: r#"[run]
seed = 19

[sweep.traffic_jam]
kind = "traffic-jam"
env = "sse"
rho = 0.5
sites = [0, 1, 2]
horizons = [4.0, 16.0, 64.0]
replicas = 10000
range_replicas = 100000
"#,
    },
];

pub fn find(name: &str) -> Option<&'static Recipe> {
    RECIPES.iter().find(|r| r.name == name)
}
