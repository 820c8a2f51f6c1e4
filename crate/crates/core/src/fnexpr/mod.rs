//! Bivariate function expressions `f(x, y)` and the builtin registry.
//!
//! Evaluation never produces NaN: every domain violation (log of a
//! nonpositive number, division by zero, `0^negative`, a negative base
//! raised to a non-integer power, overflow to infinity) is reported as an
//! [`Error::Eval`] carrying the byte span of the offending sub-expression.

mod parser;

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
    Pow,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Func {
    Sin,
    Cos,
    Exp,
    Log,
    Sqrt,
    Abs,
}

impl Func {
    fn name(self) -> &'static str {
        match self {
            Func::Sin => "sin",
            Func::Cos => "cos",
            Func::Exp => "exp",
            Func::Log => "log",
            Func::Sqrt => "sqrt",
            Func::Abs => "abs",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub(crate) enum NodeKind {
    Num(f64),
    X,
    Y,
    Neg(Box<Node>),
    Bin(BinOp, Box<Node>, Box<Node>),
    Call(Func, Box<Node>),
}

#[derive(Debug, Clone, PartialEq)]
pub(crate) struct Node {
    pub(crate) kind: NodeKind,
    pub(crate) span: (usize, usize),
}

impl Node {
    fn bin(op: BinOp, lhs: Node, rhs: Node) -> Node {
        let span = (lhs.span.0, rhs.span.1);
        Node { kind: NodeKind::Bin(op, Box::new(lhs), Box::new(rhs)), span }
    }
}

/// A parsed expression tree, still carrying the source it came from so
/// evaluation errors can quote the offending fragment.
#[derive(Debug, Clone, PartialEq)]
pub struct ExprAst {
    root: Node,
    src: String,
}

/// Parse an expression string.
pub fn parse(src: &str) -> Result<ExprAst> {
    if src.trim().is_empty() {
        return Err(Error::Parse { offset: 0, expected: "a nonempty expression".into() });
    }
    let root = parser::Parser::new(src)?.parse_to_end()?;
    Ok(ExprAst { root, src: src.to_owned() })
}

/// Evaluate at `(x, y)`.
pub fn evaluate(ast: &ExprAst, x: f64, y: f64) -> Result<f64> {
    eval_node(&ast.root, x, y, &ast.src)
}

fn eval_err(node: &Node, src: &str, reason: impl Into<String>) -> Error {
    let (a, b) = node.span;
    Error::Eval {
        span: node.span,
        fragment: src.get(a..b).unwrap_or("").to_owned(),
        reason: reason.into(),
    }
}

fn eval_node(node: &Node, x: f64, y: f64, src: &str) -> Result<f64> {
    let value = match &node.kind {
        NodeKind::Num(v) => *v,
        NodeKind::X => x,
        NodeKind::Y => y,
        NodeKind::Neg(inner) => -eval_node(inner, x, y, src)?,
        NodeKind::Bin(op, lhs, rhs) => {
            let a = eval_node(lhs, x, y, src)?;
            let b = eval_node(rhs, x, y, src)?;
            match op {
                BinOp::Add => a + b,
                BinOp::Sub => a - b,
                BinOp::Mul => a * b,
                BinOp::Div => {
                    if b == 0.0 {
                        return Err(eval_err(node, src, "division by zero"));
                    }
                    a / b
                }
                BinOp::Pow => {
                    if a == 0.0 && b < 0.0 {
                        return Err(eval_err(node, src, "zero raised to a negative power"));
                    }
                    if a < 0.0 && b.fract() != 0.0 {
                        return Err(eval_err(
                            node,
                            src,
                            "negative base with non-integer exponent",
                        ));
                    }
                    a.powf(b)
                }
            }
        }
        NodeKind::Call(func, arg) => {
            let v = eval_node(arg, x, y, src)?;
            match func {
                Func::Sin => v.sin(),
                Func::Cos => v.cos(),
                Func::Exp => v.exp(),
                Func::Log => {
                    if v <= 0.0 {
                        return Err(eval_err(node, src, "log of a nonpositive argument"));
                    }
                    v.ln()
                }
                Func::Sqrt => {
                    if v < 0.0 {
                        return Err(eval_err(node, src, "square root of a negative argument"));
                    }
                    v.sqrt()
                }
                Func::Abs => v.abs(),
            }
        }
    };
    if !value.is_finite() {
        return Err(eval_err(node, src, "non-finite result"));
    }
    Ok(value)
}

/// Fully parenthesized rendering; reparsing it yields a tree that
/// evaluates identically.
pub fn pretty_print(ast: &ExprAst) -> String {
    fn go(node: &Node, out: &mut String) {
        match &node.kind {
            NodeKind::Num(v) => {
                out.push_str(&format!("{v}"));
            }
            NodeKind::X => out.push('x'),
            NodeKind::Y => out.push('y'),
            NodeKind::Neg(inner) => {
                out.push_str("(-");
                go(inner, out);
                out.push(')');
            }
            NodeKind::Bin(op, lhs, rhs) => {
                out.push('(');
                go(lhs, out);
                out.push_str(match op {
                    BinOp::Add => " + ",
                    BinOp::Sub => " - ",
                    BinOp::Mul => "*",
                    BinOp::Div => "/",
                    BinOp::Pow => "^",
                });
                go(rhs, out);
                out.push(')');
            }
            NodeKind::Call(func, arg) => {
                out.push_str(func.name());
                out.push('(');
                go(arg, out);
                out.push(')');
            }
        }
    }
    let mut out = String::new();
    go(&ast.root, &mut out);
    out
}

type TotalFn = Arc<dyn Fn(f64, f64) -> f64 + Send + Sync>;

/// Exact first and second partial derivatives, when the function provides
/// them (all builtins do); used by the derivative and Voronovskaya checks
/// instead of finite differences.
#[derive(Clone)]
pub struct Partials {
    pub fx: TotalFn,
    pub fy: TotalFn,
    pub fxx: TotalFn,
    pub fyy: TotalFn,
}

type FallibleFn = Arc<dyn Fn(f64, f64) -> Result<f64> + Send + Sync>;

#[derive(Clone)]
enum FnKind {
    Expr(Arc<ExprAst>),
    Closure(TotalFn),
    Fallible(FallibleFn),
}

/// An evaluatable function of `(x, y)` with optional polynomial-growth
/// metadata `(N1, N2)` declaring membership in the weight class.
#[derive(Clone)]
pub struct BivariateFn {
    label: String,
    growth: Option<(u32, u32)>,
    kind: FnKind,
    partials: Option<Arc<Partials>>,
}

impl fmt::Debug for BivariateFn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("BivariateFn")
            .field("label", &self.label)
            .field("growth", &self.growth)
            .finish()
    }
}

impl BivariateFn {
    /// Parse `src` into a function with no growth metadata.
    pub fn from_expr(src: &str) -> Result<Self> {
        let ast = parse(src)?;
        Ok(Self {
            label: src.trim().to_owned(),
            growth: None,
            kind: FnKind::Expr(Arc::new(ast)),
            partials: None,
        })
    }

    /// Wrap a total closure.
    pub fn from_closure(
        label: impl Into<String>,
        growth: Option<(u32, u32)>,
        f: impl Fn(f64, f64) -> f64 + Send + Sync + 'static,
    ) -> Self {
        Self {
            label: label.into(),
            growth,
            kind: FnKind::Closure(Arc::new(f)),
            partials: None,
        }
    }

    /// Wrap a closure that may fail (derived functions such as `t·f` or a
    /// Steklov mean must propagate inner evaluation errors).
    pub fn from_fallible(
        label: impl Into<String>,
        growth: Option<(u32, u32)>,
        f: impl Fn(f64, f64) -> Result<f64> + Send + Sync + 'static,
    ) -> Self {
        Self {
            label: label.into(),
            growth,
            kind: FnKind::Fallible(Arc::new(f)),
            partials: None,
        }
    }

    pub fn with_partials(mut self, partials: Partials) -> Self {
        self.partials = Some(Arc::new(partials));
        self
    }

    pub fn with_growth(mut self, n1: u32, n2: u32) -> Self {
        self.growth = Some((n1, n2));
        self
    }

    pub fn eval(&self, x: f64, y: f64) -> Result<f64> {
        match &self.kind {
            FnKind::Expr(ast) => evaluate(ast, x, y),
            FnKind::Closure(f) => Ok(f(x, y)),
            FnKind::Fallible(f) => f(x, y),
        }
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn growth(&self) -> Option<(u32, u32)> {
        self.growth
    }

    pub fn partials(&self) -> Option<&Partials> {
        self.partials.as_deref()
    }
}

/// Named test functions used by the table and figure presets.
///
/// `"xy"`, `"t2-poly"`, `"fig5"` carry growth metadata; `"fig7"` and
/// `"fig6"` grow exponentially in one variable and so belong to no
/// polynomial weight class — they are meant for bounded rectangles only.
pub fn builtin(name: &str) -> Result<BivariateFn> {
    use std::f64::consts::PI;
    let f = match name {
        "xy" => BivariateFn::from_closure("x*y", Some((1, 1)), |x, y| x * y).with_partials(
            Partials {
                fx: Arc::new(|_, y| y),
                fy: Arc::new(|x, _| x),
                fxx: Arc::new(|_, _| 0.0),
                fyy: Arc::new(|_, _| 0.0),
            },
        ),
        "t2-poly" => BivariateFn::from_closure(
            "x^3*y + 6*y^2 + x^2",
            Some((3, 2)),
            |x, y| x.powi(3) * y + 6.0 * y * y + x * x,
        )
        .with_partials(Partials {
            fx: Arc::new(|x, y| 3.0 * x * x * y + 2.0 * x),
            fy: Arc::new(|x, y| x.powi(3) + 12.0 * y),
            fxx: Arc::new(|x, y| 6.0 * x * y + 2.0),
            fyy: Arc::new(|_, _| 12.0),
        }),
        "fig5" => BivariateFn::from_closure(
            "x^4*y*(x-1)^4*sin(2*pi*y)",
            Some((8, 1)),
            |x, y| x.powi(4) * y * (x - 1.0).powi(4) * (2.0 * PI * y).sin(),
        )
        .with_partials(Partials {
            fx: Arc::new(|x, y| {
                (4.0 * x.powi(3) * (x - 1.0).powi(4) + 4.0 * x.powi(4) * (x - 1.0).powi(3))
                    * y
                    * (2.0 * PI * y).sin()
            }),
            fy: Arc::new(|x, y| {
                x.powi(4)
                    * (x - 1.0).powi(4)
                    * ((2.0 * PI * y).sin() + 2.0 * PI * y * (2.0 * PI * y).cos())
            }),
            fxx: Arc::new(|x, y| {
                (12.0 * x * x * (x - 1.0).powi(4)
                    + 32.0 * x.powi(3) * (x - 1.0).powi(3)
                    + 12.0 * x.powi(4) * (x - 1.0).powi(2))
                    * y
                    * (2.0 * PI * y).sin()
            }),
            fyy: Arc::new(|x, y| {
                x.powi(4)
                    * (x - 1.0).powi(4)
                    * (4.0 * PI * (2.0 * PI * y).cos()
                        - 4.0 * PI * PI * y * (2.0 * PI * y).sin())
            }),
        }),
        "fig7" => BivariateFn::from_closure("y^2*exp(2*x)", None, |x, y| {
            y * y * (2.0 * x).exp()
        })
        .with_partials(Partials {
            fx: Arc::new(|x, y| 2.0 * y * y * (2.0 * x).exp()),
            fy: Arc::new(|x, y| 2.0 * y * (2.0 * x).exp()),
            fxx: Arc::new(|x, y| 4.0 * y * y * (2.0 * x).exp()),
            fyy: Arc::new(|x, _| 2.0 * (2.0 * x).exp()),
        }),
        "fig6" => BivariateFn::from_closure("x^2*exp(x+y)", None, |x, y| {
            x * x * (x + y).exp()
        })
        .with_partials(Partials {
            fx: Arc::new(|x, y| (2.0 * x + x * x) * (x + y).exp()),
            fy: Arc::new(|x, y| x * x * (x + y).exp()),
            fxx: Arc::new(|x, y| (2.0 + 4.0 * x + x * x) * (x + y).exp()),
            fyy: Arc::new(|x, y| x * x * (x + y).exp()),
        }),
        other => return Err(Error::UnknownBuiltin(other.to_owned())),
    };
    Ok(f)
}

/// Names accepted by [`builtin`].
pub const BUILTIN_NAMES: [&str; 5] = ["xy", "t2-poly", "fig5", "fig7", "fig6"];

#[cfg(test)]
mod tests {
    use super::*;

    fn eval_str(src: &str, x: f64, y: f64) -> Result<f64> {
        evaluate(&parse(src).unwrap(), x, y)
    }

    #[test]
    fn arithmetic_examples() {
        assert_eq!(eval_str("x*y", 0.3, 0.4).unwrap(), 0.3 * 0.4);
        assert_eq!(eval_str("x^3*y + 6*y^2 + x^2", 1.0, 1.0).unwrap(), 8.0);
        assert_eq!(eval_str("-x^2", 2.0, 0.0).unwrap(), -4.0);
        assert!((eval_str("sin(2*pi*y)", 0.0, 0.25).unwrap() - 1.0).abs() < 1e-15);
        let v = eval_str("y^2*exp(2*x)", 0.5, 0.5).unwrap();
        assert!((v - 0.25 * std::f64::consts::E).abs() < 1e-12);
        assert!((v - 0.6795705).abs() < 1e-7);
    }

    #[test]
    fn precedence_and_associativity() {
        assert_eq!(eval_str("2+3*4", 0.0, 0.0).unwrap(), 14.0);
        assert_eq!(eval_str("2*3^2", 0.0, 0.0).unwrap(), 18.0);
        assert_eq!(eval_str("2^3^2", 0.0, 0.0).unwrap(), 512.0); // right-assoc
        assert_eq!(eval_str("-2^2", 0.0, 0.0).unwrap(), -4.0);
        assert_eq!(eval_str("(1+2)*(3+4)", 0.0, 0.0).unwrap(), 21.0);
        assert_eq!(eval_str("6/3/2", 0.0, 0.0).unwrap(), 1.0); // left-assoc
        assert_eq!(eval_str("1 - 2 - 3", 0.0, 0.0).unwrap(), -4.0);
        assert_eq!(eval_str("--x", 5.0, 0.0).unwrap(), 5.0);
        assert_eq!(eval_str("2*-3", 0.0, 0.0).unwrap(), -6.0);
    }

    #[test]
    fn numbers_with_exponents() {
        assert_eq!(eval_str("1.5e2", 0.0, 0.0).unwrap(), 150.0);
        assert_eq!(eval_str("2e-1", 0.0, 0.0).unwrap(), 0.2);
        assert_eq!(eval_str(".5", 0.0, 0.0).unwrap(), 0.5);
        // `2e` is number 2 followed by the constant e (missing operator).
        assert!(parse("2e").is_err());
        assert_eq!(eval_str("2*e", 0.0, 0.0).unwrap(), 2.0 * std::f64::consts::E);
    }

    #[test]
    fn evaluation_errors() {
        match eval_str("log(x)", 0.0, 1.0).unwrap_err() {
            Error::Eval { reason, .. } => assert!(reason.contains("nonpositive")),
            other => panic!("unexpected error {other:?}"),
        }
        assert!(eval_str("1/ (x - x)", 1.0, 0.0).is_err());
        assert!(eval_str("x^(0-1)", 0.0, 0.0).is_err());
        assert!(eval_str("(0-2)^0.5", 0.0, 0.0).is_err());
        assert!(eval_str("sqrt(0-1)", 0.0, 0.0).is_err());
        assert!(eval_str("exp(exp(x))", 10.0, 0.0).is_err()); // overflow, not inf
        // Negative base with integer exponent is fine.
        assert_eq!(eval_str("(0-2)^3", 0.0, 0.0).unwrap(), -8.0);
    }

    #[test]
    fn parse_errors_carry_offsets() {
        match parse("x +* y").unwrap_err() {
            Error::Parse { offset, .. } => assert_eq!(offset, 3),
            other => panic!("unexpected error {other:?}"),
        }
        match parse("x + z").unwrap_err() {
            Error::UnknownIdentifier { offset, name } => {
                assert_eq!(offset, 4);
                assert_eq!(name, "z");
            }
            other => panic!("unexpected error {other:?}"),
        }
        assert!(parse("").is_err());
        assert!(parse("(x+y").is_err());
        assert!(parse("sin x").is_err());
        assert!(parse("x 2").is_err());
        assert!(parse("2^-3").is_err()); // exponent must be a factor
    }

    #[test]
    fn builtins_registry() {
        assert_eq!(builtin("xy").unwrap().eval(0.9, 0.9).unwrap(), 0.81);
        assert_eq!(builtin("t2-poly").unwrap().eval(0.0, 0.0).unwrap(), 0.0);
        for y in [0.0, 0.25, 1.7] {
            assert_eq!(builtin("fig5").unwrap().eval(1.0, y).unwrap(), 0.0);
        }
        assert_eq!(builtin("xy").unwrap().growth(), Some((1, 1)));
        assert_eq!(builtin("t2-poly").unwrap().growth(), Some((3, 2)));
        assert_eq!(builtin("fig5").unwrap().growth(), Some((8, 1)));
        assert_eq!(builtin("fig7").unwrap().growth(), None);
        assert_eq!(builtin("fig6").unwrap().growth(), None);
        assert!(matches!(builtin("nope"), Err(Error::UnknownBuiltin(_))));
    }

    #[test]
    fn builtin_labels_parse_to_same_function() {
        for name in BUILTIN_NAMES {
            let b = builtin(name).unwrap();
            let ast = parse(b.label()).unwrap();
            for i in 0..5 {
                for j in 0..5 {
                    let (x, y) = (0.17 + 0.41 * i as f64, 0.29 + 0.37 * j as f64);
                    let direct = b.eval(x, y).unwrap();
                    let parsed = evaluate(&ast, x, y).unwrap();
                    assert!(
                        (direct - parsed).abs() <= 1e-12 * (1.0 + direct.abs()),
                        "{name} at ({x}, {y}): {direct} vs {parsed}"
                    );
                }
            }
        }
    }

    #[test]
    fn builtin_partials_match_finite_differences() {
        let h = 1e-5;
        for name in BUILTIN_NAMES {
            let b = builtin(name).unwrap();
            let p = b.partials().unwrap();
            for &(x, y) in &[(0.3, 0.7), (1.2, 0.4), (0.05, 1.9)] {
                let f = |x, y| b.eval(x, y).unwrap();
                let fx = (f(x + h, y) - f(x - h, y)) / (2.0 * h);
                let fy = (f(x, y + h) - f(x, y - h)) / (2.0 * h);
                let fxx = (f(x + h, y) - 2.0 * f(x, y) + f(x - h, y)) / (h * h);
                let fyy = (f(x, y + h) - 2.0 * f(x, y) + f(x, y - h)) / (h * h);
                let scale = 1.0 + f(x, y).abs();
                assert!(((p.fx)(x, y) - fx).abs() < 1e-6 * scale, "{name} fx");
                assert!(((p.fy)(x, y) - fy).abs() < 1e-6 * scale, "{name} fy");
                assert!(((p.fxx)(x, y) - fxx).abs() < 1e-4 * scale, "{name} fxx");
                assert!(((p.fyy)(x, y) - fyy).abs() < 1e-4 * scale, "{name} fyy");
            }
        }
    }

    #[test]
    fn mutated_inputs_never_panic() {
        let seeds = [
            "x*y",
            "x^3*y + 6*y^2 + x^2",
            "sin(2*pi*y)",
            "sqrt(abs(x - y))/(1 + x)",
            "exp(x)^2 - log(1 + y)",
        ];
        let junk = ["", "(", ")", "^", "**", "..", "e+", "zz", "1e", "-", "sin", "pi("];
        for seed in seeds {
            for j in junk {
                for cut in 0..=seed.len() {
                    let mutated = format!("{}{}{}", &seed[..cut], j, &seed[cut..]);
                    // Must return, never panic; evaluation errors are fine.
                    if let Ok(ast) = parse(&mutated) {
                        let _ = evaluate(&ast, 0.5, 0.5);
                    }
                }
            }
        }
    }
}
