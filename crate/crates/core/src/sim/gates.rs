//! Unitary matrices per [`GateKind`].
//!
//! Two-qubit matrices are written in the basis `|a b⟩` where `a` is the
//! gate's first operand (the control, for controlled kinds).

use std::f64::consts::FRAC_1_SQRT_2;

use num_complex::Complex64 as C64;

use crate::circuit::GateKind;

pub type Mat2 = [[C64; 2]; 2];
pub type Mat4 = [[C64; 4]; 4];

const ZERO: C64 = C64 { re: 0.0, im: 0.0 };
const ONE: C64 = C64 { re: 1.0, im: 0.0 };
const I: C64 = C64 { re: 0.0, im: 1.0 };

fn phase(theta: f64) -> C64 {
    C64::from_polar(1.0, theta)
}

pub fn single_qubit_matrix(kind: GateKind, params: &[f64]) -> Option<Mat2> {
    let h = C64::new(FRAC_1_SQRT_2, 0.0);
    let m = match kind {
        GateKind::Id => [[ONE, ZERO], [ZERO, ONE]],
        GateKind::X => [[ZERO, ONE], [ONE, ZERO]],
        GateKind::Y => [[ZERO, -I], [I, ZERO]],
        GateKind::Z => [[ONE, ZERO], [ZERO, -ONE]],
        GateKind::H => [[h, h], [h, -h]],
        GateKind::S => [[ONE, ZERO], [ZERO, I]],
        GateKind::Sdg => [[ONE, ZERO], [ZERO, -I]],
        GateKind::T => [[ONE, ZERO], [ZERO, phase(std::f64::consts::FRAC_PI_4)]],
        GateKind::Tdg => [[ONE, ZERO], [ZERO, phase(-std::f64::consts::FRAC_PI_4)]],
        GateKind::Sx => {
            let a = C64::new(0.5, 0.5);
            let b = C64::new(0.5, -0.5);
            [[a, b], [b, a]]
        }
        GateKind::Rx => {
            let (s, c) = (params[0] / 2.0).sin_cos();
            [[C64::new(c, 0.0), C64::new(0.0, -s)], [C64::new(0.0, -s), C64::new(c, 0.0)]]
        }
        GateKind::Ry => {
            let (s, c) = (params[0] / 2.0).sin_cos();
            [[C64::new(c, 0.0), C64::new(-s, 0.0)], [C64::new(s, 0.0), C64::new(c, 0.0)]]
        }
        GateKind::Rz => [[phase(-params[0] / 2.0), ZERO], [ZERO, phase(params[0] / 2.0)]],
        GateKind::P => [[ONE, ZERO], [ZERO, phase(params[0])]],
        GateKind::U => {
            let (theta, phi, lambda) = (params[0], params[1], params[2]);
            let (s, c) = (theta / 2.0).sin_cos();
            [
                [C64::new(c, 0.0), -phase(lambda) * s],
                [phase(phi) * s, phase(phi + lambda) * c],
            ]
        }
        _ => return None,
    };
    Some(m)
}

pub fn two_qubit_matrix(kind: GateKind, params: &[f64]) -> Option<Mat4> {
    let diag = |d: [C64; 4]| {
        let mut m = [[ZERO; 4]; 4];
        for (i, v) in d.into_iter().enumerate() {
            m[i][i] = v;
        }
        m
    };
    let m = match kind {
        GateKind::Cx => [
            [ONE, ZERO, ZERO, ZERO],
            [ZERO, ONE, ZERO, ZERO],
            [ZERO, ZERO, ZERO, ONE],
            [ZERO, ZERO, ONE, ZERO],
        ],
        GateKind::Swap => [
            [ONE, ZERO, ZERO, ZERO],
            [ZERO, ZERO, ONE, ZERO],
            [ZERO, ONE, ZERO, ZERO],
            [ZERO, ZERO, ZERO, ONE],
        ],
        GateKind::Cz => diag([ONE, ONE, ONE, -ONE]),
        GateKind::Cp => diag([ONE, ONE, ONE, phase(params[0])]),
        GateKind::Crz => diag([ONE, ONE, phase(-params[0] / 2.0), phase(params[0] / 2.0)]),
        GateKind::Rzz => {
            let (m, p) = (phase(-params[0] / 2.0), phase(params[0] / 2.0));
            diag([m, p, p, m])
        }
        _ => return None,
    };
    Some(m)
}

pub fn dagger2(m: &Mat2) -> Mat2 {
    let mut d = [[ZERO; 2]; 2];
    for (i, row) in m.iter().enumerate() {
        for (j, v) in row.iter().enumerate() {
            d[j][i] = v.conj();
        }
    }
    d
}

pub fn dagger4(m: &Mat4) -> Mat4 {
    let mut d = [[ZERO; 4]; 4];
    for (i, row) in m.iter().enumerate() {
        for (j, v) in row.iter().enumerate() {
            d[j][i] = v.conj();
        }
    }
    d
}
