//! The shipped groups, subgroups and scenarios.

use std::fmt::Write as _;

use crate::coset::DoubleCosetSpace;
use crate::error::{Error, Result};
use crate::group::{ChartLaw, FiniteGroup, Group};
use crate::subgroup::{resolve, Curve, Shape, Subgroup};

use super::config::ScenarioConfig;

pub struct ScenarioEntry {
    pub name: &'static str,
    pub text: &'static str,
    /// Part of `verify --all`.
    pub ship: bool,
}

pub const SCENARIOS: &[ScenarioEntry] = &[
    ScenarioEntry { name: "S3-KH12", text: include_str!("../../scenarios/s3-kh12.conf"), ship: true },
    ScenarioEntry { name: "trivial", text: include_str!("../../scenarios/trivial.conf"), ship: true },
    ScenarioEntry { name: "S3-classical", text: include_str!("../../scenarios/s3-classical.conf"), ship: true },
    ScenarioEntry { name: "S4-klein", text: include_str!("../../scenarios/s4-klein.conf"), ship: true },
    ScenarioEntry { name: "S4-right-cosets", text: include_str!("../../scenarios/s4-right-cosets.conf"), ship: true },
    ScenarioEntry { name: "D4-reflections", text: include_str!("../../scenarios/d4-reflections.conf"), ship: true },
    ScenarioEntry { name: "heisenberg-center", text: include_str!("../../scenarios/heisenberg-center.conf"), ship: true },
    ScenarioEntry { name: "axb-translations", text: include_str!("../../scenarios/axb-translations.conf"), ship: true },
    ScenarioEntry { name: "axb-dilations", text: include_str!("../../scenarios/axb-dilations.conf"), ship: true },
    // N = SO(2) is not open in SE(2): half of the measure layer does not apply.
    ScenarioEntry { name: "se2-rotations", text: include_str!("../../scenarios/se2-rotations.conf"), ship: false },
];

pub const GROUPS: &[&str] = &["S3", "S4", "D4", "axb", "heisenberg", "se2"];

pub fn build_group(name: &str) -> Result<Group> {
    Ok(match name {
        "S3" => Group::finite("S3", FiniteGroup::symmetric(3)),
        "S4" => Group::finite("S4", FiniteGroup::symmetric(4)),
        "D4" => Group::finite("D4", FiniteGroup::dihedral4()),
        "axb" => Group::charted(ChartLaw::AffineLine),
        "heisenberg" => Group::charted(ChartLaw::Heisenberg),
        "se2" => Group::charted(ChartLaw::Se2),
        other => return Err(Error::Config(format!("unknown group {other:?}; known: {}", GROUPS.join(", ")))),
    })
}

fn listed_subgroups(group: &str) -> &'static [&'static str] {
    match group {
        "S3" => &["e", "<(12)>", "<(123)>"],
        "S4" => &["e", "<(12)>", "<(123)>", "klein4", "<(1234)>"],
        "D4" => &["e", "<(24)>", "<(13)>", "<(13)(24)>", "<(1234)>"],
        "axb" => &["e", "translations", "dilations"],
        "heisenberg" => &["e", "center", "x-axis"],
        "se2" => &["e", "so2"],
        _ => &[],
    }
}

/// Normality: exhaustive on finite groups, declared for the charted curves.
pub fn is_normal(group: &Group, k: &Subgroup) -> bool {
    match (group.as_finite(), k.shape()) {
        (_, Shape::Trivial | Shape::Whole) => true,
        (Some(g), Shape::Finite(m)) => (0..g.order()).all(|x| {
            m.iter().all(|&k| m.binary_search(&g.mul(g.mul(x, k), g.inv(x))).is_ok())
        }),
        (None, Shape::Curve(c)) => matches!(c, Curve::HeisenbergCenter | Curve::AxbTranslations),
        _ => false,
    }
}

pub fn scenario(name: &str) -> Result<ScenarioConfig> {
    let e = SCENARIOS
        .iter()
        .find(|e| e.name == name)
        .ok_or_else(|| Error::Config(format!("unknown scenario {name:?}")))?;
    ScenarioConfig::parse(e.text)
}

pub fn ship_suite() -> Result<Vec<ScenarioConfig>> {
    SCENARIOS.iter().filter(|e| e.ship).map(|e| ScenarioConfig::parse(e.text)).collect()
}

/// Groups, subgroups with their flags, and scenarios.
pub fn list_catalog() -> Result<String> {
    let mut out = String::new();
    writeln!(out, "groups").unwrap();
    for name in GROUPS {
        let g = build_group(name)?;
        let size = match g.order() {
            Some(n) => format!("order {n}"),
            None => format!("chart dimension {}", g.dim()),
        };
        let unimodular = match g.law() {
            Some(ChartLaw::AffineLine) => false,
            _ => true,
        };
        writeln!(out, "  {name}: {size}, unimodular={unimodular}").unwrap();
        for s in listed_subgroups(name) {
            let sub = resolve(&g, s)?;
            let size = match sub.order() {
                Some(n) => format!("order {n}"),
                None => "one-parameter".into(),
            };
            let mut flags = vec![format!("IN={}", sub.is_in()), format!("compact={}", sub.is_compact())];
            flags.push(format!("normal={}", is_normal(&g, &sub)));
            if g.is_finite() {
                let members: Vec<String> = sub.elements(&g).unwrap_or_default().iter().map(|x| g.label(x)).collect();
                flags.push(format!("elements={{{}}}", members.join(",")));
            }
            writeln!(out, "    {s}: {size}, {}", flags.join(", ")).unwrap();
        }
    }
    writeln!(out, "scenarios").unwrap();
    for e in SCENARIOS {
        let cfg = ScenarioConfig::parse(e.text)?;
        let g = build_group(&cfg.group)?;
        let space = DoubleCosetSpace::new(g.clone(), resolve(&g, &cfg.k)?, resolve(&g, &cfg.h)?)?;
        let n_is_g = match space.normalizer().shape() {
            Shape::Whole => true,
            Shape::Finite(m) => m.len() == g.order().unwrap_or(0),
            _ => false,
        };
        writeln!(
            out,
            "  {}{}: G={} K={} H={} N={} N=G:{} N-open={} K-normal={} K-IN={}",
            e.name,
            if e.ship { "" } else { " (not in --all)" },
            cfg.group,
            cfg.k,
            cfg.h,
            space.normalizer().name(),
            n_is_g,
            space.n_is_open(),
            is_normal(&g, space.k()),
            space.k().is_in()
        )
        .unwrap();
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn catalog_lists_every_group() {
        let text = list_catalog().unwrap();
        for g in ["S3", "S4", "D4", "axb", "heisenberg", "se2"] {
            assert!(text.contains(&format!("  {g}:")), "{g}");
        }
    }

    #[test]
    fn heisenberg_center_is_normal_and_n_is_g() {
        let text = list_catalog().unwrap();
        let line = text.lines().find(|l| l.trim_start().starts_with("center:")).unwrap();
        assert!(line.contains("normal=true"));
        let sc = text.lines().find(|l| l.trim_start().starts_with("heisenberg-center:")).unwrap();
        assert!(sc.contains("N=G:true"), "{sc}");
    }

    #[test]
    fn so2_is_in() {
        let text = list_catalog().unwrap();
        let line = text.lines().find(|l| l.trim_start().starts_with("so2:")).unwrap();
        assert!(line.contains("IN=true") && line.contains("compact=true"));
    }

    #[test]
    fn klein_four_is_normal_in_s4() {
        let g = build_group("S4").unwrap();
        assert!(is_normal(&g, &resolve(&g, "klein4").unwrap()));
        assert!(!is_normal(&g, &resolve(&g, "<(12)>").unwrap()));
    }
}
