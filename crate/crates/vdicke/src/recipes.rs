//! Bundled figure-reproduction configs.

use crate::config::{self, RunConfig, Source};

#[derive(Debug, Clone, Copy)]
pub struct Recipe {
    pub name: &'static str,
    /// The TOML config text.
    pub source: &'static str,
}

pub const RECIPES: &[Recipe] = &[
    Recipe {
        name: "fig1b",
        source: include_str!("../recipes/fig1b.toml"),
    },
    Recipe {
        name: "fig1c",
        source: include_str!("../recipes/fig1c.toml"),
    },
    Recipe {
        name: "fig1d",
        source: include_str!("../recipes/fig1d.toml"),
    },
    Recipe {
        name: "fig1e-cutscan",
        source: include_str!("../recipes/fig1e-cutscan.toml"),
    },
    Recipe {
        name: "fig2a",
        source: include_str!("../recipes/fig2a.toml"),
    },
    Recipe {
        name: "fig2b",
        source: include_str!("../recipes/fig2b.toml"),
    },
    Recipe {
        name: "fig2c",
        source: include_str!("../recipes/fig2c.toml"),
    },
    Recipe {
        name: "fig2d",
        source: include_str!("../recipes/fig2d.toml"),
    },
    Recipe {
        name: "fig2e",
        source: include_str!("../recipes/fig2e.toml"),
    },
    Recipe {
        name: "fig2f",
        source: include_str!("../recipes/fig2f.toml"),
    },
    Recipe {
        name: "fig3a",
        source: include_str!("../recipes/fig3a.toml"),
    },
    Recipe {
        name: "fig3b",
        source: include_str!("../recipes/fig3b.toml"),
    },
    Recipe {
        name: "fig4b",
        source: include_str!("../recipes/fig4b.toml"),
    },
    Recipe {
        name: "fig4c",
        source: include_str!("../recipes/fig4c.toml"),
    },
    Recipe {
        name: "fig4d",
        source: include_str!("../recipes/fig4d.toml"),
    },
];

impl Recipe {
    pub fn parse(&self) -> Result<RunConfig, config::ConfigError> {
        config::load(&Source::inline(format!("recipe {}", self.name), self.source), &[])
    }
}

pub fn find(name: &str) -> Option<&'static Recipe> {
    RECIPES.iter().find(|r| r.name == name)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn names_unique_and_match_output_stems() {
        for (i, r) in RECIPES.iter().enumerate() {
            assert!(RECIPES[..i].iter().all(|o| o.name != r.name));
            let cfg = r.parse().unwrap();
            assert_eq!(cfg.output.name.as_deref(), Some(r.name));
            assert!(cfg.task.is_some() && cfg.description.is_some(), "{}", r.name);
        }
    }
}
