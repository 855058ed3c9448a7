//! Dispatch from a typed configuration to the library. Each experiment
//! returns a JSON payload and one CSV table.

use std::fmt::Write as _;

use kazhdan_core::complexes::{genus_surface_complex, CwSurface};
use kazhdan_core::covers::{
    build_cover_with_limits, deck_permutation, is_free_automorphism, verify_tower, CoverLimits,
};
use kazhdan_core::curves::{
    extremal_check, hodge_gram, make_curve, periods, total_mass_with_order, CanonicalDensity,
    HyperellipticCurve, BRANCH_PROXIMITY, C64,
};
use kazhdan_core::hodge::{
    edge_labels, fourier_limit_measure, measure_convergence_experiment_with_limits,
};
use kazhdan_core::l2approx::{
    kernel_dims_finite, lueck_betti_sequence_with_limits, vn_kernel_dim_fourier, LueckSequence,
};
use kazhdan_core::Result;
use serde_json::{json, Value};

use crate::config::*;

/// Samples per point for the extremal check in `curve-density`.
const EXTREMAL_TRIALS: usize = 100;

pub struct Output {
    pub payload: Value,
    pub csv_header: String,
    pub csv_rows: Vec<String>,
}

pub fn run(params: &Params, seed: u64) -> Result<Output> {
    params.validate()?;
    match params {
        Params::Betti(p) => betti(p),
        Params::Cover(p) => cover(p),
        Params::LueckMatrix(p) => lueck_matrix(p),
        Params::LueckBetti(p) => lueck_betti(p),
        Params::HodgeMeasure(p) => hodge_measure(p),
        Params::LimitMeasure(p) => limit_measure(p),
        Params::CurveDensity(p) => curve_density(p, seed),
        Params::CurveMass(p) => curve_mass(p),
        Params::Disk(p) => disk(p, seed),
    }
}

fn limits(max_degree: usize) -> CoverLimits {
    CoverLimits { max_degree }
}

fn surface_summary(c: &CwSurface) -> Value {
    json!({
        "genus": c.genus(),
        "vertices": c.vertex_count(),
        "edges": c.edge_count(),
        "faces": c.face_count(),
        "euler_characteristic": c.euler_characteristic(),
        "betti": c.betti_numbers(),
    })
}

fn betti(p: &BettiParams) -> Result<Output> {
    let base = genus_surface_complex(p.genus)?;
    let (surface, degree) = match &p.cover {
        Some(desc) => {
            let spec = desc.spec(p.genus, limits(p.max_degree))?;
            (
                build_cover_with_limits(&base, &spec, limits(p.max_degree))?,
                spec.degree(),
            )
        }
        None => (base, 1),
    };
    let b = surface.betti_numbers();
    Ok(Output {
        payload: json!({ "degree": degree, "surface": surface_summary(&surface) }),
        csv_header: "dimension,betti".into(),
        csv_rows: vec![
            format!("0,{}", b.b0),
            format!("1,{}", b.b1),
            format!("2,{}", b.b2),
        ],
    })
}

fn cover(p: &CoverParams) -> Result<Output> {
    let base = genus_surface_complex(p.genus)?;
    let spec = p.cover.spec(p.genus, limits(p.max_degree))?;
    let c = build_cover_with_limits(&base, &spec, limits(p.max_degree))?;
    let d = spec.degree();
    let deck_free = (0..d).all(|h| is_free_automorphism(&c, &deck_permutation(&base, &spec, h)));
    let labels = edge_labels(&c);
    let rows = c
        .edges()
        .iter()
        .zip(&labels)
        .enumerate()
        .map(|(i, ([s, t], l))| format!("{i},{l},{s},{t}"))
        .collect();
    Ok(Output {
        payload: json!({
            "degree": d,
            "surface": surface_summary(&c),
            "euler_multiplicative": c.euler_characteristic() == d as i64 * base.euler_characteristic(),
            "deck_action_free": deck_free,
        }),
        csv_header: "edge_id,label,source,target".into(),
        csv_rows: rows,
    })
}

fn sequence_rows(s: &LueckSequence) -> Vec<String> {
    s.to_csv().lines().skip(1).map(str::to_owned).collect()
}

fn lueck_matrix(p: &LueckMatrixParams) -> Result<Output> {
    let f = p.matrix()?;
    let quotients = p.quotients()?;
    let dims = quotients
        .iter()
        .map(|q| kernel_dims_finite(&f, q, p.max_order))
        .collect::<Result<Vec<_>>>()?;
    let seq = kazhdan_core::l2approx::lueck_kernel_sequence(&f, &quotients)?;
    let vn = vn_kernel_dim_fourier(&f, p.nodes)?;
    Ok(Output {
        payload: json!({
            "matrix": f,
            "sequence": seq,
            "kernel_dims": dims,
            "von_neumann": vn,
        }),
        csv_header: LueckSequence::CSV_HEADER.into(),
        csv_rows: sequence_rows(&seq),
    })
}

fn lueck_betti(p: &LueckBettiParams) -> Result<Output> {
    let base = genus_surface_complex(p.genus)?;
    let tower = p.tower.spec(p.genus, limits(p.max_degree))?;
    let seq = lueck_betti_sequence_with_limits(&base, &tower, p.degree, limits(p.max_degree))?;
    Ok(Output {
        payload: json!({
            "degree": p.degree,
            "tower": verify_tower(&tower, p.genus)?,
            "sequence": seq,
            "limit": seq.limit,
        }),
        csv_header: LueckSequence::CSV_HEADER.into(),
        csv_rows: sequence_rows(&seq),
    })
}

fn hodge_measure(p: &HodgeParams) -> Result<Output> {
    let base = genus_surface_complex(p.genus)?;
    let tower = p.tower.spec(p.genus, limits(p.max_degree))?;
    let report = measure_convergence_experiment_with_limits(&base, &tower, limits(p.max_degree))?;
    let mut rows = Vec::new();
    for l in &report.levels {
        for (e, (label, v)) in l.measure.labels.iter().zip(&l.measure.values).enumerate() {
            rows.push(format!("{},{},{e},{label},{v}", l.level, l.degree));
        }
    }
    if let Some(limit) = &report.limit {
        for (e, (label, v)) in limit
            .measure
            .labels
            .iter()
            .zip(&limit.measure.values)
            .enumerate()
        {
            rows.push(format!("limit,inf,{e},{label},{v}"));
        }
    }
    Ok(Output {
        payload: json!({ "tower": verify_tower(&tower, p.genus)?, "report": report }),
        csv_header: "level,degree,edge_id,label,value".into(),
        csv_rows: rows,
    })
}

fn limit_measure(p: &LimitParams) -> Result<Output> {
    let d = p.weights.first().map_or(0, Vec::len);
    let nodes = p.nodes.unwrap_or(if d <= 1 {
        kazhdan_core::hodge::DEFAULT_LIMIT_NODES_RANK1
    } else {
        kazhdan_core::hodge::DEFAULT_LIMIT_NODES_RANK2
    });
    let limit = fourier_limit_measure(p.genus, &p.weights, nodes)?;
    let rows = limit
        .measure
        .to_csv()
        .lines()
        .skip(1)
        .map(str::to_owned)
        .collect();
    Ok(Output {
        payload: serde_json::to_value(&limit).expect("limit serializes"),
        csv_header: "edge_id,label,value".into(),
        csv_rows: rows,
    })
}

fn curve(coefficients: &[[f64; 2]]) -> Result<HyperellipticCurve> {
    let c: Vec<C64> = coefficients
        .iter()
        .map(|&[re, im]| C64::new(re, im))
        .collect();
    make_curve(&c)
}

fn curve_summary(c: &HyperellipticCurve) -> Value {
    let branch: Vec<[f64; 2]> = c.branch_points().iter().map(|z| [z.re, z.im]).collect();
    json!({
        "genus": c.genus(),
        "degree": c.degree(),
        "branch_points": branch,
        "branched_at_infinity": c.branched_at_infinity(),
    })
}

fn gram_json(g: &kazhdan_core::curves::GramMatrix) -> Value {
    let m = g.matrix();
    let rows: Vec<Vec<[f64; 2]>> = (0..m.nrows())
        .map(|i| {
            (0..m.ncols())
                .map(|j| [m[(i, j)].re, m[(i, j)].im])
                .collect()
        })
        .collect();
    json!({ "matrix": rows, "min_eigenvalue": g.min_eigenvalue(), "hermitian_defect": g.hermitian_defect() })
}

fn curve_density(p: &CurveDensityParams, seed: u64) -> Result<Output> {
    let c = curve(&p.coefficients)?;
    let points: Vec<C64> = p.points.iter().map(|&[re, im]| C64::new(re, im)).collect();
    // reject points near a branch point before the period computation
    let rho_check = |x: C64| -> Result<()> {
        let (k, dist) = c.nearest_branch_point(x);
        if dist < BRANCH_PROXIMITY {
            return Err(kazhdan_core::Error::BranchProximity {
                point: x.to_string(),
                branch: c.branch_points()[k].to_string(),
                distance: dist,
            });
        }
        Ok(())
    };
    points.iter().try_for_each(|&x| rho_check(x))?;
    let per = periods(&c, p.period_nodes)?;
    let gram = hodge_gram(&c, &per)?;
    let rho = CanonicalDensity::new(&c, &gram);
    let mut rows = Vec::new();
    let mut checks = Vec::new();
    for (i, &x) in points.iter().enumerate() {
        let v = rho.value(x)?;
        let ex = extremal_check(&c, &gram, x, EXTREMAL_TRIALS, seed.wrapping_add(i as u64))?;
        rows.push(format!("{},{},{v}", x.re, x.im));
        checks.push(ex);
    }
    Ok(Output {
        payload: json!({
            "curve": curve_summary(&c),
            "periods": per.to_json(),
            "gram": gram_json(&gram),
            "extremal": checks,
        }),
        csv_header: "re,im,rho".into(),
        csv_rows: rows,
    })
}

fn curve_mass(p: &CurveMassParams) -> Result<Output> {
    let c = curve(&p.coefficients)?;
    let per = periods(&c, p.period_nodes)?;
    let gram = hodge_gram(&c, &per)?;
    let m = total_mass_with_order(&c, &gram, p.order)?;
    Ok(Output {
        payload: json!({ "curve": curve_summary(&c), "gram": gram_json(&gram), "mass": m }),
        csv_header: "order,mass".into(),
        csv_rows: vec![
            format!("{},{}", m.order, m.mass),
            format!("{},{}", 2 * m.order, m.mass_doubled_nodes),
        ],
    })
}

fn disk(p: &DiskParams, seed: u64) -> Result<Output> {
    let report = kazhdan_core::curves::disk_model_checks(&p.radii, p.grid, seed)?;
    let rows = report
        .measures
        .iter()
        .map(|m| format!("{},{},{}", m.radius, m.closed_form, m.quadrature))
        .collect();
    Ok(Output {
        payload: serde_json::to_value(&report).expect("report serializes"),
        csv_header: "radius,closed_form,quadrature".into(),
        csv_rows: rows,
    })
}

/// CSV text with the config hash and seed as leading comment lines, which
/// gnuplot and most CSV readers skip.
pub fn render_csv(out: &Output, hash: &str, seed: u64) -> String {
    let mut s = String::new();
    writeln!(s, "# config_hash={hash}").unwrap();
    writeln!(s, "# seed={seed}").unwrap();
    writeln!(s, "{}", out.csv_header).unwrap();
    for r in &out.csv_rows {
        writeln!(s, "{r}").unwrap();
    }
    s
}
