//! Scores and geometry derived from a solved assessment.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::dataset::Dataset;
use crate::models::{PriceFrame, ProgramKind, VgaAssessment, PEER_TOL};

/// Below this magnitude the SIC price does not assert a scale direction.
pub const TOL_W: f64 = 1e-7;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RtsClass {
    Increasing,
    Decreasing,
    /// The unit already operates at its best returns to practice.
    Constant,
    /// PTE has no SIC row, so no scale direction exists.
    NotApplicable,
}

impl fmt::Display for RtsClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            RtsClass::Increasing => "increasing",
            RtsClass::Decreasing => "decreasing",
            RtsClass::Constant => "constant (bRTP)",
            RtsClass::NotApplicable => "not applicable (no SIC)",
        })
    }
}

pub fn classify_w(kind: ProgramKind, w: f64) -> RtsClass {
    match kind {
        ProgramKind::Pte => RtsClass::NotApplicable,
        ProgramKind::Ste { .. } if w > TOL_W => RtsClass::Decreasing,
        ProgramKind::Ste { .. } if w < -TOL_W => RtsClass::Increasing,
        ProgramKind::Ste { .. } => RtsClass::Constant,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Decomposition {
    pub efficiency: f64,
    pub inefficiency: f64,
    /// Affected technical inefficiency `(v·x − u·y)/α_aff`.
    pub technical_inefficiency: f64,
    /// Unaffected technical inefficiency `(v·x − u·y)/(v·x)`.
    pub technical_inefficiency_plain: f64,
    pub technical_efficiency: f64,
    pub scale: f64,
    pub xi: f64,
    pub rts: RtsClass,
}

impl Decomposition {
    /// Every term is a ratio of money values, so the Step I and Step II frames give the
    /// same result.
    pub fn from_frame(f: &PriceFrame, kind: ProgramKind) -> Self {
        let efficiency = f.beta_aff / f.alpha_aff;
        let technical_inefficiency = (f.alpha - f.beta) / f.alpha_aff;
        Self {
            efficiency,
            inefficiency: 1.0 - efficiency,
            technical_inefficiency,
            technical_inefficiency_plain: (f.alpha - f.beta) / f.alpha,
            technical_efficiency: 1.0 - technical_inefficiency,
            scale: f.omega / f.alpha_aff,
            xi: (f.beta_hat_aff / f.beta_aff) / (f.alpha_hat_aff / f.alpha_aff),
            rts: classify_w(kind, f.w),
        }
    }
}

pub fn decompose(a: &VgaAssessment) -> Decomposition {
    Decomposition::from_frame(&a.normalized, a.kind)
}

/// Best returns to practice: relative growth of virtual output over relative growth
/// of virtual input when moving to the target.
pub fn brtp(a: &VgaAssessment) -> f64 {
    decompose(a).xi
}

pub fn rts_classify(a: &VgaAssessment) -> RtsClass {
    classify_w(a.kind, a.normalized.w)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Frame {
    Pte,
    Ste,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PointKind {
    Dmu,
    Peer,
    Assessed,
    Target,
    Anchor,
    Origin,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeometryPoint {
    pub id: String,
    pub x: f64,
    pub y: f64,
    pub kind: PointKind,
    /// 1 to 4 counter-clockwise from the positive quadrant; 0 on an axis.
    pub quadrant: u8,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Coordinates {
    pub x: f64,
    pub y: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeometryVector {
    pub from: String,
    pub to: String,
    pub label: String,
    pub dx: f64,
    pub dy: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Geometry {
    pub frame: Frame,
    pub points: Vec<GeometryPoint>,
    pub anchor: Coordinates,
    pub boundary: String,
    pub vectors: Vec<GeometryVector>,
}

pub fn quadrant(x: f64, y: f64) -> u8 {
    match (x, y) {
        (x, y) if x > 0.0 && y > 0.0 => 1,
        (x, y) if x < 0.0 && y > 0.0 => 2,
        (x, y) if x < 0.0 && y < 0.0 => 3,
        (x, y) if x > 0.0 && y < 0.0 => 4,
        _ => 0,
    }
}

impl Geometry {
    pub fn point(&self, id: &str) -> Option<&GeometryPoint> {
        self.points.iter().find(|p| p.id == id)
    }

    pub fn vector(&self, from: &str, to: &str) -> Option<&GeometryVector> {
        self.vectors.iter().find(|v| v.from == from && v.to == to)
    }

    /// Largest violation of `y ≤ x` over the DMU points.
    pub fn diagonal_violation(&self) -> f64 {
        self.points
            .iter()
            .filter(|p| matches!(p.kind, PointKind::Dmu | PointKind::Peer | PointKind::Assessed))
            .map(|p| p.y - p.x)
            .fold(f64::NEG_INFINITY, f64::max)
    }
}

/// Virtual technology points in the Step II frame. PTE assessments use plain
/// coordinates `(v·x_j, u·y_j)`; STE assessments shift each unit by its share of the
/// SIC price, `(v·x_j + (1−γ)w, u·y_j − γw)`, which places zero-gap units on the diagonal.
pub fn geometry(d: &Dataset, a: &VgaAssessment) -> Geometry {
    let f = &a.normalized;
    let frame = if a.kind.is_ste() { Frame::Ste } else { Frame::Pte };
    let (shift_x, shift_y) = match frame {
        Frame::Pte => (0.0, 0.0),
        Frame::Ste => ((1.0 - a.gamma) * f.w, -a.gamma * f.w),
    };
    let mut points = Vec::with_capacity(d.n() + 4);
    let mut push = |id: &str, x: f64, y: f64, kind: PointKind| {
        points.push(GeometryPoint {
            id: id.to_string(),
            x,
            y,
            kind,
            quadrant: quadrant(x, y),
        })
    };
    for (j, dmu) in d.dmus.iter().enumerate() {
        let x = f.v.iter().zip(&dmu.inputs).map(|(v, x)| v * x).sum::<f64>() + shift_x;
        let y = f.u.iter().zip(&dmu.outputs).map(|(u, y)| u * y).sum::<f64>() + shift_y;
        let kind = if dmu.id == a.dmu {
            PointKind::Assessed
        } else if a.pi[j] > PEER_TOL {
            PointKind::Peer
        } else {
            PointKind::Dmu
        };
        push(&dmu.id, x, y, kind);
    }
    let anchor = Coordinates {
        x: (1.0 - a.gamma) * f.omega,
        y: -a.gamma * f.omega,
    };
    push("K", f.alpha_aff, f.beta_aff, PointKind::Assessed);
    push("T", f.alpha_hat_aff, f.beta_hat_aff, PointKind::Target);
    push("AP", anchor.x, anchor.y, PointKind::Anchor);
    push("O", 0.0, 0.0, PointKind::Origin);

    let k = (f.alpha_aff, f.beta_aff);
    let t = (f.alpha_hat_aff, f.beta_hat_aff);
    let vector = |from: &str, to: &str, label: &str, a: (f64, f64), b: (f64, f64)| GeometryVector {
        from: from.to_string(),
        to: to.to_string(),
        label: label.to_string(),
        dx: b.0 - a.0,
        dy: b.1 - a.1,
    };
    let ap = (anchor.x, anchor.y);
    let vectors = vec![
        vector("O", "K", "relative", (0.0, 0.0), k),
        vector("AP", "O", "scale", ap, (0.0, 0.0)),
        vector("AP", "K", "technical", ap, k),
        vector("K", "T", "improvement", k, t),
    ];
    Geometry {
        frame,
        points,
        anchor,
        boundary: "diagonal".to_string(),
        vectors,
    }
}

/// Coordinate-wise residual of `AP→K = AP→O + O→K = (v·x_o, u·y_o)`.
pub fn vector_identity_residual(g: &Geometry, a: &VgaAssessment) -> f64 {
    let (Some(ap_k), Some(ap_o), Some(o_k)) = (g.vector("AP", "K"), g.vector("AP", "O"), g.vector("O", "K")) else {
        return f64::INFINITY;
    };
    let f = &a.normalized;
    [
        ap_k.dx - (ap_o.dx + o_k.dx),
        ap_k.dy - (ap_o.dy + o_k.dy),
        (f.alpha_aff - (1.0 - a.gamma) * f.omega) - f.alpha,
        (f.beta_aff + a.gamma * f.omega) - f.beta,
        ap_k.dx - f.alpha,
        ap_k.dy - f.beta,
    ]
    .iter()
    .fold(0.0, |acc: f64, r| acc.max(r.abs()))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Interlinkage {
    pub input_shares: Vec<f64>,
    pub output_shares: Vec<f64>,
    pub affected_inputs: Vec<f64>,
    pub affected_outputs: Vec<f64>,
    pub affected_input_total: f64,
    pub affected_output_total: f64,
}

fn shares(side: f64, ratios: &[f64]) -> Vec<f64> {
    let total: f64 = ratios.iter().sum();
    if total > PEER_TOL {
        ratios.iter().map(|r| side * r / total).collect()
    } else {
        // No slack on this side: split evenly so the side still carries its part of ω.
        vec![side / ratios.len() as f64; ratios.len()]
    }
}

/// Splits the scalar price over the individual inputs and outputs in proportion to
/// their slack ratios.
pub fn interlinkage(a: &VgaAssessment) -> Interlinkage {
    let f = &a.normalized;
    let input_shares = shares(1.0 - a.gamma, &a.q);
    let output_shares = shares(a.gamma, &a.p);
    let affected_inputs: Vec<f64> = f
        .v
        .iter()
        .zip(&a.x_o)
        .zip(&input_shares)
        .map(|((v, x), g)| v * x + g * f.omega)
        .collect();
    let affected_outputs: Vec<f64> = f
        .u
        .iter()
        .zip(&a.y_o)
        .zip(&output_shares)
        .map(|((u, y), g)| u * y - g * f.omega)
        .collect();
    Interlinkage {
        affected_input_total: affected_inputs.iter().sum(),
        affected_output_total: affected_outputs.iter().sum(),
        input_shares,
        output_shares,
        affected_inputs,
        affected_outputs,
    }
}
