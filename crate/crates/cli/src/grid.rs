//! Sweep grids: `key=v1,v2;key2=v3,...`, expanded as a Cartesian product
//! with the first key outermost.

use crate::config::{DriveSection, ExperimentConfig};
use crate::error::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum GridKey {
    Beta,
    BetaRel,
    Finesse,
    Harmonic,
    Detuning,
    Modes,
}

impl GridKey {
    pub const ALL: [GridKey; 6] = [
        GridKey::Beta,
        GridKey::BetaRel,
        GridKey::Finesse,
        GridKey::Harmonic,
        GridKey::Detuning,
        GridKey::Modes,
    ];

    pub fn name(self) -> &'static str {
        match self {
            GridKey::Beta => "beta",
            GridKey::BetaRel => "beta_rel",
            GridKey::Finesse => "finesse",
            GridKey::Harmonic => "m",
            GridKey::Detuning => "delta",
            GridKey::Modes => "modes",
        }
    }

    fn parse(s: &str) -> Result<Self, CliError> {
        GridKey::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| CliError::Grid(format!("unknown key `{s}`")))
    }

    fn is_integer(self) -> bool {
        matches!(self, GridKey::Harmonic | GridKey::Modes)
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Grid {
    pub axes: Vec<(GridKey, Vec<f64>)>,
}

/// One grid point: a value for every key of the grid.
pub type GridPoint = Vec<(GridKey, f64)>;

impl Grid {
    pub fn parse(spec: &str) -> Result<Self, CliError> {
        let mut axes: Vec<(GridKey, Vec<f64>)> = Vec::new();
        for part in spec.split(';').map(str::trim).filter(|p| !p.is_empty()) {
            let (key, values) = part
                .split_once('=')
                .ok_or_else(|| CliError::Grid(format!("`{part}` is not key=values")))?;
            let key = GridKey::parse(key.trim())?;
            if axes.iter().any(|(k, _)| *k == key) {
                return Err(CliError::Grid(format!("key `{}` given twice", key.name())));
            }
            if key == GridKey::Beta && axes.iter().any(|(k, _)| *k == GridKey::BetaRel)
                || key == GridKey::BetaRel && axes.iter().any(|(k, _)| *k == GridKey::Beta)
            {
                return Err(CliError::Grid(
                    "use either beta or beta_rel, not both".into(),
                ));
            }
            let mut parsed = Vec::new();
            for v in values.split(',').map(str::trim).filter(|v| !v.is_empty()) {
                let x: f64 = v.parse().map_err(|_| {
                    CliError::Grid(format!("`{v}` is not a number (key `{}`)", key.name()))
                })?;
                if !x.is_finite() || (key.is_integer() && (x < 1.0 || x.fract() != 0.0)) {
                    return Err(CliError::Grid(format!(
                        "invalid value `{v}` for key `{}`",
                        key.name()
                    )));
                }
                parsed.push(x);
            }
            axes.push((key, parsed));
        }
        Ok(Grid { axes })
    }

    /// Grid points in order; empty when the grid has no keys or a key has
    /// no values.
    pub fn points(&self) -> Vec<GridPoint> {
        if self.axes.is_empty() {
            return Vec::new();
        }
        let mut points: Vec<GridPoint> = vec![Vec::new()];
        for (key, values) in &self.axes {
            points = points
                .into_iter()
                .flat_map(|p| {
                    values.iter().map(move |&v| {
                        let mut q = p.clone();
                        q.push((*key, v));
                        q
                    })
                })
                .collect();
        }
        points
    }
}

/// Copy of `base` with the point's values substituted.
pub fn apply_point(
    base: &ExperimentConfig,
    point: &GridPoint,
) -> Result<ExperimentConfig, CliError> {
    let mut c = base.clone();
    for &(key, v) in point {
        match key {
            GridKey::Finesse => {
                c.cavity.finesse = Some(v);
                c.cavity.reflectivity = None;
            }
            GridKey::Harmonic => c.cavity.harmonic = v as u32,
            GridKey::Detuning => c.cavity.detuning = v,
            GridKey::Modes => c.run.modes = Some(v as usize),
            GridKey::Beta | GridKey::BetaRel => {}
        }
    }
    for &(key, v) in point {
        if matches!(key, GridKey::Beta | GridKey::BetaRel) {
            match &mut c.drive {
                DriveSection::Mechanical {
                    epsilon_m,
                    beta,
                    beta_rel,
                    ..
                } => {
                    *epsilon_m = None;
                    *beta = (key == GridKey::Beta).then_some(v);
                    *beta_rel = (key == GridKey::BetaRel).then_some(v);
                }
                DriveSection::Optical => {
                    return Err(CliError::Grid(format!(
                        "`{}` cannot be swept for an optical drive",
                        key.name()
                    )));
                }
            }
        }
    }
    Ok(c)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn expands_in_order() {
        let g = Grid::parse("m=1,2;beta_rel=0.1,0.2").unwrap();
        let p = g.points();
        assert_eq!(p.len(), 4);
        assert_eq!(
            p[0],
            vec![(GridKey::Harmonic, 1.0), (GridKey::BetaRel, 0.1)]
        );
        assert_eq!(
            p[1],
            vec![(GridKey::Harmonic, 1.0), (GridKey::BetaRel, 0.2)]
        );
        assert_eq!(
            p[3],
            vec![(GridKey::Harmonic, 2.0), (GridKey::BetaRel, 0.2)]
        );
    }

    #[test]
    fn empty_grids_have_no_points() {
        assert!(Grid::parse("").unwrap().points().is_empty());
        assert!(Grid::parse("m=").unwrap().points().is_empty());
        assert!(Grid::parse("m=1,2;beta=").unwrap().points().is_empty());
    }

    #[test]
    fn malformed_grids_fail() {
        for bad in [
            "m",
            "colour=1",
            "m=1.5",
            "m=0",
            "beta=x",
            "m=1;m=2",
            "beta=1;beta_rel=2",
            "delta=inf",
        ] {
            assert!(matches!(Grid::parse(bad), Err(CliError::Grid(_))), "{bad}");
        }
    }
}
