//! Split-order tensor-product spaces and their per-cell DoF layouts.
//!
//! For an order case `(h, v)` the four prognostic fields live in
//!
//! * `U = CG_{h+1}(x) ⊗ DG_v(z)`
//! * `W = DG_h(x) ⊗ CG_{v+1}(z)`
//! * `P = DG_h(x) ⊗ DG_v(z)`
//! * `B` shares the layout of `W`.
//!
//! Every local node on a continuous edge (`ξ = 1` for `U`, `η = 1` for `W`/`B`)
//! is owned by the neighbouring cell, so each field has `(h+1)(v+1)` unique
//! DoFs per cell.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::basis1d::Basis1D;
use crate::error::{domain, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct OrderCase {
    h: usize,
    v: usize,
}

impl OrderCase {
    pub fn new(h: usize, v: usize) -> Result<Self> {
        if h > 1 || v > 1 {
            return domain(format!("order case ({h},{v}) not supported; h, v must be 0 or 1"));
        }
        Ok(Self { h, v })
    }

    pub const ALL: [OrderCase; 4] = [
        OrderCase { h: 0, v: 0 },
        OrderCase { h: 0, v: 1 },
        OrderCase { h: 1, v: 0 },
        OrderCase { h: 1, v: 1 },
    ];

    pub fn h(&self) -> usize {
        self.h
    }

    pub fn v(&self) -> usize {
        self.v
    }

    /// Unique DoFs per cell for each field.
    pub fn dofs_per_cell(&self) -> usize {
        (self.h + 1) * (self.v + 1)
    }

    /// Dimension of the per-wavenumber system over all four fields.
    pub fn system_dim(&self) -> usize {
        4 * self.dofs_per_cell()
    }
}

impl fmt::Display for OrderCase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{})", self.h, self.v)
    }
}

impl std::str::FromStr for OrderCase {
    type Err = crate::error::WaveError;

    /// Parses `"h,v"`, optionally wrapped in parentheses.
    fn from_str(s: &str) -> Result<Self> {
        let t = s.trim().trim_start_matches('(').trim_end_matches(')');
        let parts: Vec<_> = t.split(',').map(str::trim).collect();
        if parts.len() != 2 {
            return domain(format!("cannot parse order case '{s}', expected h,v"));
        }
        let parse = |p: &str| {
            p.parse::<usize>()
                .map_err(|_| crate::error::WaveError::Domain(format!("bad order '{p}' in '{s}'")))
        };
        OrderCase::new(parse(parts[0])?, parse(parts[1])?)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Field {
    U,
    W,
    P,
    B,
}

impl Field {
    pub const ALL: [Field; 4] = [Field::U, Field::W, Field::P, Field::B];

    /// Block index in the stacked state `(u, w, p, b)`.
    pub fn index(self) -> usize {
        self as usize
    }

    pub fn name(self) -> &'static str {
        match self {
            Field::U => "u",
            Field::W => "w",
            Field::P => "p",
            Field::B => "b",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum DofTag {
    Interior,
    /// On an `x = const` edge, shared with the left/right neighbour.
    SharedX,
    /// On a `z = const` edge, shared with the lower/upper neighbour.
    SharedZ,
}

/// One node of the local (per-cell) expansion.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LocalNode {
    pub xi: f64,
    pub eta: f64,
    /// Index into the horizontal / vertical 1D basis.
    pub ix: usize,
    pub iz: usize,
    /// Unique DoF this node is identified with.
    pub owner: usize,
    /// Offset of the owning cell relative to this one (0 or 1 in each direction).
    pub shift: (usize, usize),
}

/// A unique (owned) DoF of one cell.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UniqueDof {
    pub id: usize,
    pub xi: f64,
    pub eta: f64,
    pub tag: DofTag,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FieldSpace {
    pub field: Field,
    pub horiz: Basis1D,
    pub vert: Basis1D,
    nodes: Vec<LocalNode>,
    unique: Vec<UniqueDof>,
}

impl FieldSpace {
    fn new(field: Field, horiz: Basis1D, vert: Basis1D) -> Self {
        let owned = |b: &Basis1D| -> Vec<usize> {
            // the node at reference coordinate 1 of a continuous basis belongs to the next cell
            (0..b.node_count())
                .filter(|&i| !(b.is_continuous() && b.nodes()[i] == 1.0))
                .collect()
        };
        let hx = owned(&horiz);
        let vz = owned(&vert);

        let mut unique = Vec::with_capacity(hx.len() * vz.len());
        for &j in &vz {
            for &i in &hx {
                let xi = horiz.nodes()[i];
                let eta = vert.nodes()[j];
                let tag = if horiz.is_continuous() && xi == 0.0 {
                    DofTag::SharedX
                } else if vert.is_continuous() && eta == 0.0 {
                    DofTag::SharedZ
                } else {
                    DofTag::Interior
                };
                unique.push(UniqueDof { id: unique.len(), xi, eta, tag });
            }
        }

        let mut nodes = Vec::with_capacity(horiz.node_count() * vert.node_count());
        for j in 0..vert.node_count() {
            for i in 0..horiz.node_count() {
                let xi = horiz.nodes()[i];
                let eta = vert.nodes()[j];
                let sx = usize::from(horiz.is_continuous() && xi == 1.0);
                let sz = usize::from(vert.is_continuous() && eta == 1.0);
                let oi = if sx == 1 { 0 } else { i };
                let oj = if sz == 1 { 0 } else { j };
                let owner = vz.iter().position(|&q| q == oj).unwrap() * hx.len()
                    + hx.iter().position(|&q| q == oi).unwrap();
                nodes.push(LocalNode { xi, eta, ix: i, iz: j, owner, shift: (sx, sz) });
            }
        }
        Self { field, horiz, vert, nodes, unique }
    }

    /// All local nodes, x-fastest then bottom-to-top.
    pub fn nodes(&self) -> &[LocalNode] {
        &self.nodes
    }

    pub fn local_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn unique_dofs_per_cell(&self) -> usize {
        self.unique.len()
    }

    /// Owned DoFs in their canonical order.
    pub fn dof_numbering(&self) -> &[UniqueDof] {
        &self.unique
    }

    /// Value of local basis function `n` at reference point `(s, t)`.
    pub fn eval(&self, n: &LocalNode, s: f64, t: f64) -> f64 {
        self.horiz.eval_unchecked(n.ix, s) * self.vert.eval_unchecked(n.iz, t)
    }

    /// Reference-coordinate gradient of local basis function `n`.
    pub fn grad(&self, n: &LocalNode, s: f64, t: f64) -> (f64, f64) {
        (
            self.horiz.deriv_unchecked(n.ix, s) * self.vert.eval_unchecked(n.iz, t),
            self.horiz.eval_unchecked(n.ix, s) * self.vert.deriv_unchecked(n.iz, t),
        )
    }
}

/// The four field spaces of one order case, indexed by [`Field::index`].
#[derive(Debug, Clone, PartialEq)]
pub struct CaseSpaces {
    pub case: OrderCase,
    spaces: [FieldSpace; 4],
}

impl CaseSpaces {
    pub fn get(&self, f: Field) -> &FieldSpace {
        &self.spaces[f.index()]
    }

    pub fn iter(&self) -> impl Iterator<Item = &FieldSpace> {
        self.spaces.iter()
    }

    pub fn system_dim(&self) -> usize {
        self.spaces.iter().map(FieldSpace::unique_dofs_per_cell).sum()
    }
}

impl std::ops::Index<Field> for CaseSpaces {
    type Output = FieldSpace;
    fn index(&self, f: Field) -> &FieldSpace {
        self.get(f)
    }
}

pub fn build_case(c: OrderCase) -> CaseSpaces {
    let cg = |r| Basis1D::continuous(r).expect("order case validated");
    let dg = |r| Basis1D::discontinuous(r).expect("order case validated");
    let (h, v) = (c.h(), c.v());
    CaseSpaces {
        case: c,
        spaces: [
            FieldSpace::new(Field::U, cg(h + 1), dg(v)),
            FieldSpace::new(Field::W, dg(h), cg(v + 1)),
            FieldSpace::new(Field::P, dg(h), dg(v)),
            FieldSpace::new(Field::B, dg(h), cg(v + 1)),
        ],
    }
}

pub fn dof_numbering(fs: &FieldSpace) -> &[UniqueDof] {
    fs.dof_numbering()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::basis1d::BasisKind;

    fn case(h: usize, v: usize) -> OrderCase {
        OrderCase::new(h, v).unwrap()
    }

    #[test]
    fn only_four_cases() {
        assert!(OrderCase::new(2, 0).is_err());
        assert!(OrderCase::new(0, 2).is_err());
        assert_eq!(OrderCase::ALL.len(), 4);
        assert_eq!("1,0".parse::<OrderCase>().unwrap(), case(1, 0));
        assert_eq!("(0, 1)".parse::<OrderCase>().unwrap(), case(0, 1));
        assert!("1".parse::<OrderCase>().is_err());
    }

    #[test]
    fn layouts_1_0() {
        let s = build_case(case(1, 0));
        let u = &s[Field::U];
        assert_eq!(u.horiz.kind, BasisKind::QuadraticE);
        assert_eq!(u.vert.kind, BasisKind::ConstantG);
        let d = u.dof_numbering();
        assert_eq!(d.len(), 2);
        assert_eq!((d[0].xi, d[0].eta, d[0].tag), (0.0, 0.5, DofTag::SharedX));
        assert_eq!((d[1].xi, d[1].eta, d[1].tag), (0.5, 0.5, DofTag::Interior));
        // the third node sits on the right edge and is owned by the next cell
        assert_eq!(u.nodes()[2].owner, 0);
        assert_eq!(u.nodes()[2].shift, (1, 0));

        let w = dof_numbering(&s[Field::W]);
        assert_eq!(w.len(), 2);
        assert_eq!((w[0].xi, w[0].eta), (0.0, 0.0));
        assert_eq!((w[1].xi, w[1].eta), (1.0, 0.0));
        assert!(w.iter().all(|d| d.tag == DofTag::SharedZ));
    }

    #[test]
    fn layouts_0_1() {
        let s = build_case(case(0, 1));
        let w = dof_numbering(&s[Field::W]);
        assert_eq!((w[0].xi, w[0].eta, w[0].tag), (0.5, 0.0, DofTag::SharedZ));
        assert_eq!((w[1].xi, w[1].eta, w[1].tag), (0.5, 0.5, DofTag::Interior));
        assert_eq!(s[Field::B], FieldSpace { field: Field::B, ..s[Field::W].clone() });
    }

    #[test]
    fn unique_counts_all_cases() {
        for c in OrderCase::ALL {
            let s = build_case(c);
            assert_eq!(s.system_dim(), c.system_dim());
            for fs in s.iter() {
                let local = fs.horiz.node_count() * fs.vert.node_count();
                let shared = fs.nodes().iter().filter(|n| n.shift != (0, 0)).count();
                assert_eq!(local - shared, c.dofs_per_cell());
                assert_eq!(fs.unique_dofs_per_cell(), c.dofs_per_cell());
            }
        }
        assert_eq!(build_case(case(0, 0)).system_dim(), 4);
        assert_eq!(build_case(case(1, 1)).system_dim(), 16);
    }

    #[test]
    fn continuity_directions() {
        for c in OrderCase::ALL {
            let s = build_case(c);
            for fs in s.iter() {
                for d in fs.dof_numbering() {
                    match fs.field {
                        Field::U => assert_ne!(d.tag, DofTag::SharedZ),
                        Field::W | Field::B => assert_ne!(d.tag, DofTag::SharedX),
                        Field::P => assert_eq!(d.tag, DofTag::Interior),
                    }
                }
                for n in fs.nodes() {
                    match fs.field {
                        Field::U => assert_eq!(n.shift.1, 0),
                        Field::W | Field::B => assert_eq!(n.shift.0, 0),
                        Field::P => assert_eq!(n.shift, (0, 0)),
                    }
                }
            }
        }
    }

    #[test]
    fn ordering_is_x_fastest_bottom_to_top() {
        let s = build_case(case(1, 1));
        for fs in s.iter() {
            let d = fs.dof_numbering();
            for pair in d.windows(2) {
                assert!(pair[0].eta < pair[1].eta || (pair[0].eta == pair[1].eta && pair[0].xi < pair[1].xi));
            }
        }
    }
}
