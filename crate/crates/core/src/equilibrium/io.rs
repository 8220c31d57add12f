//! Model directory format: `model.json` plus one CSV per profile.
//!
//! The JSON document carries the law, the global scalars and the
//! extrapolation tag of each profile (the CSV itself is just `r,value`
//! rows at full precision).

use std::fs;
use std::io::BufReader;
use std::path::Path;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::{AnsatzLaw, BuildError, EquilibriumModel};
use crate::radial::{Extrapolation, RadialProfile};

#[derive(Debug, Serialize, Deserialize)]
pub(crate) struct ModelDocument {
    pub law: AnsatzLaw,
    pub e0: f64,
    pub mass: f64,
    pub support_radius: f64,
    pub phi_c: f64,
    pub u_c: f64,
    pub grid_ref: GridRef,
    pub profiles: ProfileTags,
}

#[derive(Debug, Serialize, Deserialize)]
pub(crate) struct GridRef {
    pub nodes: usize,
    pub r_max: f64,
}

#[derive(Debug, Serialize, Deserialize)]
pub(crate) struct ProfileTags {
    pub phi: ProfileTag,
    pub rho: ProfileTag,
    pub dphi: ProfileTag,
}

#[derive(Debug, Serialize, Deserialize)]
pub(crate) struct ProfileTag {
    pub file: String,
    pub extrapolation: Extrapolation,
}

pub fn write_model_dir(model: &EquilibriumModel, dir: &Path) -> Result<(), BuildError> {
    let io = |e: std::io::Error| BuildError::Io(e.to_string());
    fs::create_dir_all(dir).map_err(io)?;
    let doc = ModelDocument {
        law: model.law().clone(),
        e0: model.e0(),
        mass: model.mass(),
        support_radius: model.support_radius(),
        phi_c: model.phi_c(),
        u_c: model.u_c(),
        grid_ref: GridRef {
            nodes: model.phi().grid().len(),
            r_max: model.phi().grid().r_max(),
        },
        profiles: ProfileTags {
            phi: ProfileTag {
                file: "phi.csv".into(),
                extrapolation: model.phi().extrapolation(),
            },
            rho: ProfileTag {
                file: "rho.csv".into(),
                extrapolation: model.rho().extrapolation(),
            },
            dphi: ProfileTag {
                file: "dphi.csv".into(),
                extrapolation: model.dphi().extrapolation(),
            },
        },
    };
    let json = serde_json::to_string_pretty(&doc).map_err(|e| BuildError::Io(e.to_string()))?;
    fs::write(dir.join("model.json"), json).map_err(io)?;
    for (profile, tag) in [
        (model.phi(), &doc.profiles.phi),
        (model.rho(), &doc.profiles.rho),
        (model.dphi(), &doc.profiles.dphi),
    ] {
        let mut buf = Vec::new();
        profile.write_csv(&mut buf).map_err(io)?;
        fs::write(dir.join(&tag.file), buf).map_err(io)?;
    }
    Ok(())
}

pub fn read_model_dir(dir: &Path) -> Result<EquilibriumModel, BuildError> {
    let io = |e: std::io::Error| BuildError::Io(e.to_string());
    let doc: ModelDocument = serde_json::from_str(
        &fs::read_to_string(dir.join("model.json")).map_err(io)?,
    )
    .map_err(|e| BuildError::Io(e.to_string()))?;

    let read_profile = |tag: &ProfileTag| -> Result<RadialProfile, BuildError> {
        let file = fs::File::open(dir.join(&tag.file)).map_err(io)?;
        Ok(RadialProfile::read_csv(BufReader::new(file), tag.extrapolation)?)
    };
    let phi = read_profile(&doc.profiles.phi)?;
    // Share one grid across the three profiles.
    let grid = phi.grid_arc();
    let reuse = |p: RadialProfile| -> Result<RadialProfile, BuildError> {
        if p.grid().nodes() == grid.nodes() {
            Ok(RadialProfile::new(
                Arc::clone(&grid),
                p.values().to_vec(),
                p.extrapolation(),
            )?)
        } else {
            Err(BuildError::Io("profile grids differ".into()))
        }
    };
    let rho = reuse(read_profile(&doc.profiles.rho)?)?;
    let dphi = reuse(read_profile(&doc.profiles.dphi)?)?;

    EquilibriumModel::from_parts(doc.law, doc.e0, doc.u_c, phi, rho, dphi, doc.mass, doc.support_radius)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::equilibrium::build_equilibrium;
    use crate::radial::RadialGrid;

    #[test]
    fn model_dir_round_trip() {
        let law = AnsatzLaw::polytrope(1.0, 1.0).unwrap();
        let model =
            build_equilibrium(&law, 1.0, &RadialGrid::uniform(10.0, 128).unwrap()).unwrap();
        let dir = std::env::temp_dir().join("gravistab-model-io-test");
        write_model_dir(&model, &dir).unwrap();
        let back = read_model_dir(&dir).unwrap();
        assert_eq!(back.e0(), model.e0());
        assert_eq!(back.mass(), model.mass());
        assert_eq!(back.phi().values(), model.phi().values());
        assert_eq!(back.rho().values(), model.rho().values());
        std::fs::remove_dir_all(&dir).ok();
    }
}
