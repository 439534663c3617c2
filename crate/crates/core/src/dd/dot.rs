//! Graphviz export and a small grammar for naming diagrams to draw.

use std::fmt::Write as _;
use std::io;
use std::str::FromStr;

use super::{Manager, NodeId, Root};
use crate::error::{Error, Result};
use crate::numerics::Complex;
use crate::operator::{ObservableSpec, Pauli};

/// `%.6g` formatting.
pub fn format_g(x: f64) -> String {
    if x == 0.0 {
        return "0".into();
    }
    if !x.is_finite() {
        return format!("{x}");
    }
    let sci = format!("{x:.5e}");
    let (mant, exp) = sci.split_once('e').expect("scientific format");
    let exp: i32 = exp.parse().expect("exponent");
    if !(-4..6).contains(&exp) {
        let mant = trim_zeros(mant);
        let sign = if exp < 0 { '-' } else { '+' };
        return format!("{mant}e{sign}{:02}", exp.abs());
    }
    let decimals = (5 - exp).max(0) as usize;
    trim_zeros(&format!("{x:.decimals$}")).to_string()
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

/// Edge label `a+bi` with six significant digits per component.
pub fn format_weight(c: Complex) -> String {
    let re = if c.re == 0.0 { 0.0 } else { c.re };
    let im = if c.im == 0.0 { 0.0 } else { c.im };
    let im_s = format_g(im);
    let sign = if im_s.starts_with('-') { "" } else { "+" };
    format!("{}{sign}{im_s}i", format_g(re))
}

impl Manager {
    /// Write a diagram as a Graphviz digraph: a point marking the root edge,
    /// one circle per node labelled with its level, the terminal, and one edge
    /// per nonzero successor labelled with its weight.
    pub fn export_dot(&self, root: impl Into<Root>, sink: &mut impl io::Write) -> io::Result<()> {
        sink.write_all(self.dot_string(root).as_bytes())
    }

    pub fn dot_string(&self, root: impl Into<Root>) -> String {
        let root = root.into();
        let mut s = String::from("digraph dd {\n  rankdir=TB;\n  root [shape=point];\n  t [shape=box, label=\"1\"];\n");
        let name = |n: NodeId| if n.is_terminal() { "t".to_string() } else { format!("n{}", n.0) };
        let (root_node, root_w) = match root {
            Root::Vector(e) => (e.node, e.weight),
            Root::Matrix(e) => (e.node, e.weight),
        };
        let (nodes, arity) = match root {
            Root::Vector(e) => (self.reachable_vector(e), 2),
            Root::Matrix(e) => (self.reachable_matrix(e), 4),
        };
        for &n in &nodes {
            let level = match root {
                Root::Vector(_) => self.vnodes[n.index()].level,
                Root::Matrix(_) => self.mnodes[n.index()].level,
            };
            let _ = writeln!(s, "  {} [shape=circle, label=\"q{level}\"];", name(n));
        }
        if !root_w.is_zero() {
            let _ = writeln!(s, "  root -> {} [label=\"{}\"];", name(root_node), format_weight(self.weight(root_w)));
        }
        for &n in &nodes {
            let succ: Vec<_> = match root {
                Root::Vector(_) => self.vnodes[n.index()].succ.iter().map(|e| (e.node, e.weight)).collect(),
                Root::Matrix(_) => self.mnodes[n.index()].succ.iter().map(|e| (e.node, e.weight)).collect(),
            };
            for (k, (child, w)) in succ.into_iter().enumerate() {
                if w.is_zero() {
                    continue;
                }
                let port = if arity == 2 { format!("{k}") } else { format!("{}{}", k / 2, k % 2) };
                let _ = writeln!(
                    s,
                    "  {} -> {} [label=\"{}\", taillabel=\"{port}\"];",
                    name(n),
                    name(child),
                    format_weight(self.weight(w))
                );
            }
        }
        s.push_str("}\n");
        s
    }
}

/// Parse an angle such as `0.3`, `pi`, `-pi/4`, `3pi/4` or `2*pi`.
pub fn parse_angle(s: &str) -> Result<f64> {
    let err = || Error::Parse { what: "angle", input: s.to_string() };
    let t: String = s.chars().filter(|c| !c.is_whitespace()).collect::<String>().to_ascii_lowercase();
    let Some(pos) = t.find("pi") else {
        return t.parse::<f64>().ok().filter(|x| x.is_finite()).ok_or_else(err);
    };
    let (head, tail) = (&t[..pos], &t[pos + 2..]);
    let head = head.strip_suffix('*').unwrap_or(head);
    let coeff = match head {
        "" | "+" => 1.0,
        "-" => -1.0,
        h => h.parse::<f64>().map_err(|_| err())?,
    };
    let div = match tail {
        "" => 1.0,
        t => t.strip_prefix('/').and_then(|d| d.parse::<f64>().ok()).ok_or_else(err)?,
    };
    let v = coeff * std::f64::consts::PI / div;
    if v.is_finite() {
        Ok(v)
    } else {
        Err(err())
    }
}

/// A named state or operator that can be built and exported.
#[derive(Debug, Clone, PartialEq)]
pub enum DiagramObject {
    /// Basis state given as a bit string, top site first.
    Basis(Vec<u8>),
    Ghz(usize),
    W(usize),
    /// Two-site rotation on sites `(a, b)` of an `sites`-site system.
    Rotation { axis: Pauli, theta: f64, a: usize, b: usize, sites: usize },
    Rz { theta: f64, site: usize, sites: usize },
    Observable { obs: ObservableSpec, sites: usize },
}

impl FromStr for DiagramObject {
    type Err = Error;

    /// Grammar: `basis 0101`, `ghz N`, `w N`, `rxx|ryy|rzz ANGLE [A B L]`,
    /// `rz ANGLE [SITE L]`, `sz(i) L`, `sxsx(i,j) L`.
    fn from_str(s: &str) -> Result<Self> {
        let err = || Error::Parse { what: "diagram object", input: s.to_string() };
        let words: Vec<&str> = s.split_whitespace().collect();
        let (&head, args) = words.split_first().ok_or_else(err)?;
        let num = |i: usize| -> Result<usize> { args.get(i).and_then(|a| a.parse().ok()).ok_or_else(err) };
        let head = head.to_ascii_lowercase();
        match head.as_str() {
            "basis" if args.len() == 1 => {
                let bits = args[0]
                    .chars()
                    .map(|c| match c {
                        '0' => Ok(0),
                        '1' => Ok(1),
                        _ => Err(err()),
                    })
                    .collect::<Result<Vec<u8>>>()?;
                if bits.is_empty() {
                    return Err(err());
                }
                Ok(DiagramObject::Basis(bits))
            }
            "ghz" if args.len() == 1 => Ok(DiagramObject::Ghz(num(0)?)),
            "w" if args.len() == 1 => Ok(DiagramObject::W(num(0)?)),
            "rxx" | "ryy" | "rzz" if args.len() == 1 || args.len() == 4 => {
                let axis = match head.as_str() {
                    "rxx" => Pauli::X,
                    "ryy" => Pauli::Y,
                    _ => Pauli::Z,
                };
                let theta = parse_angle(args[0])?;
                let (a, b, sites) = if args.len() == 4 { (num(1)?, num(2)?, num(3)?) } else { (0, 1, 2) };
                Ok(DiagramObject::Rotation { axis, theta, a, b, sites })
            }
            "rz" if args.len() == 1 || args.len() == 3 => {
                let theta = parse_angle(args[0])?;
                let (site, sites) = if args.len() == 3 { (num(1)?, num(2)?) } else { (0, 1) };
                Ok(DiagramObject::Rz { theta, site, sites })
            }
            _ if args.len() == 1 && (head.starts_with("sz(") || head.starts_with("sxsx(")) => {
                Ok(DiagramObject::Observable { obs: head.parse()?, sites: num(0)? })
            }
            _ => Err(err()),
        }
    }
}

impl DiagramObject {
    pub fn build(&self, m: &mut Manager) -> Result<Root> {
        Ok(match self {
            DiagramObject::Basis(bits) => m.basis_state(bits)?.root.into(),
            DiagramObject::Ghz(n) => m.ghz_state(*n)?.root.into(),
            DiagramObject::W(n) => m.w_state(*n)?.root.into(),
            DiagramObject::Rotation { axis, theta, a, b, sites } => {
                m.two_site_rotation(*axis, *theta, *a, *b, *sites)?.root.into()
            }
            DiagramObject::Rz { theta, site, sites } => {
                m.single_site_op(&crate::operator::rz_matrix(*theta), *site, *sites)?.root.into()
            }
            DiagramObject::Observable { obs, sites } => m.observable(obs, *sites)?.root.into(),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn g_formatting() {
        assert_eq!(format_g(0.5f64.sqrt()), "0.707107");
        assert_eq!(format_g(1.0), "1");
        assert_eq!(format_g(-0.5), "-0.5");
        assert_eq!(format_g(1.5e-7), "1.5e-07");
        assert_eq!(format_g(123456789.0), "1.23457e+08");
        assert_eq!(format_g(0.0001), "0.0001");
        assert_eq!(format_weight(Complex::new(1.0, 0.0)), "1+0i");
        assert_eq!(format_weight(Complex::new(0.0, -1.0)), "0-1i");
        assert_eq!(format_weight(Complex::new(-0.0, -0.0)), "0+0i");
    }

    #[test]
    fn angles() {
        assert_eq!(parse_angle("pi").unwrap(), PI);
        assert_eq!(parse_angle("pi/2").unwrap(), PI / 2.0);
        assert_eq!(parse_angle("-pi/4").unwrap(), -PI / 4.0);
        assert_eq!(parse_angle("2*pi").unwrap(), 2.0 * PI);
        assert_eq!(parse_angle("3pi/4").unwrap(), 3.0 * PI / 4.0);
        assert_eq!(parse_angle("0.25").unwrap(), 0.25);
        for bad in ["", "pie", "pi/", "x", "inf"] {
            assert!(parse_angle(bad).is_err(), "{bad}");
        }
    }

    #[test]
    fn object_grammar() {
        assert_eq!("basis 0101".parse::<DiagramObject>().unwrap(), DiagramObject::Basis(vec![0, 1, 0, 1]));
        assert_eq!("ghz 3".parse::<DiagramObject>().unwrap(), DiagramObject::Ghz(3));
        assert!(matches!(
            "rxx pi/2".parse::<DiagramObject>().unwrap(),
            DiagramObject::Rotation { axis: Pauli::X, a: 0, b: 1, sites: 2, .. }
        ));
        assert!(matches!(
            "sxsx(0,4) 5".parse::<DiagramObject>().unwrap(),
            DiagramObject::Observable { obs: ObservableSpec::SxSx(0, 4), sites: 5 }
        ));
        for bad in ["", "basis 012", "ghz", "rxx", "rxx pi 0 1", "cat 3"] {
            assert!(bad.parse::<DiagramObject>().is_err(), "{bad}");
        }
    }

    #[test]
    fn zero_state_export() {
        let mut m = Manager::default();
        let s = m.basis_state(&[0]).unwrap();
        let dot = m.dot_string(s.root);
        assert!(dot.contains("label=\"q0\""));
        assert_eq!(dot.matches("->").count(), 2);
    }
}
