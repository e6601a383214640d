use std::fmt;

/// Elementary functions accepted by the expression language.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Func {
    Exp,
    Ln,
    Sqrt,
    Sin,
    Cos,
}

impl Func {
    pub const ALL: [Func; 5] = [Func::Exp, Func::Ln, Func::Sqrt, Func::Sin, Func::Cos];

    pub fn name(self) -> &'static str {
        match self {
            Func::Exp => "exp",
            Func::Ln => "ln",
            Func::Sqrt => "sqrt",
            Func::Sin => "sin",
            Func::Cos => "cos",
        }
    }

    pub fn from_name(name: &str) -> Option<Func> {
        Func::ALL.into_iter().find(|f| f.name() == name)
    }
}

/// A constant exponent `num / den` in lowest terms with `den > 0`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Exponent {
    num: i64,
    den: u64,
}

impl Exponent {
    pub fn integer(n: i64) -> Self {
        Exponent { num: n, den: 1 }
    }

    /// Builds a reduced rational exponent. Returns `None` for a zero denominator.
    pub fn rational(num: i64, den: i64) -> Option<Self> {
        if den == 0 {
            return None;
        }
        let sign = if den < 0 { -1 } else { 1 };
        let (n, d) = (num * sign, den.unsigned_abs());
        let g = gcd(n.unsigned_abs(), d).max(1);
        Some(Exponent {
            num: n / g as i64,
            den: d / g,
        })
    }

    pub fn numerator(&self) -> i64 {
        self.num
    }

    pub fn denominator(&self) -> u64 {
        self.den
    }

    pub fn as_integer(&self) -> Option<i64> {
        (self.den == 1).then_some(self.num)
    }

    pub fn as_f64(&self) -> f64 {
        self.num as f64 / self.den as f64
    }
}

fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

impl fmt::Display for Exponent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match (self.num, self.den) {
            (n, 1) if n >= 0 => write!(f, "{n}"),
            (n, 1) => write!(f, "({n})"),
            (n, d) => write!(f, "({n}/{d})"),
        }
    }
}

/// Expression tree. Variables are indices into the owning expression's
/// coordinate list.
#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Num(f64),
    Var(usize),
    Neg(Box<Expr>),
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
    Div(Box<Expr>, Box<Expr>),
    Pow(Box<Expr>, Exponent),
    Call(Func, Box<Expr>),
}

impl Expr {
    /// A numeric literal; negative values become `Neg(Num(|c|))` so that
    /// printed trees parse back to the same structure.
    pub fn num(c: f64) -> Expr {
        if c < 0.0 || (c == 0.0 && c.is_sign_negative()) {
            Expr::Neg(Box::new(Expr::Num(-c)))
        } else {
            Expr::Num(c)
        }
    }

    pub fn add(a: Expr, b: Expr) -> Expr {
        Expr::Add(Box::new(a), Box::new(b))
    }

    pub fn sub(a: Expr, b: Expr) -> Expr {
        Expr::Sub(Box::new(a), Box::new(b))
    }

    pub fn mul(a: Expr, b: Expr) -> Expr {
        Expr::Mul(Box::new(a), Box::new(b))
    }

    pub fn div(a: Expr, b: Expr) -> Expr {
        Expr::Div(Box::new(a), Box::new(b))
    }

    pub fn neg(a: Expr) -> Expr {
        Expr::Neg(Box::new(a))
    }

    pub fn pow(a: Expr, e: Exponent) -> Expr {
        Expr::Pow(Box::new(a), e)
    }

    pub fn call(f: Func, a: Expr) -> Expr {
        Expr::Call(f, Box::new(a))
    }

    /// Largest variable index referenced, if any.
    pub fn max_var(&self) -> Option<usize> {
        match self {
            Expr::Num(_) => None,
            Expr::Var(i) => Some(*i),
            Expr::Neg(a) | Expr::Pow(a, _) | Expr::Call(_, a) => a.max_var(),
            Expr::Add(a, b) | Expr::Sub(a, b) | Expr::Mul(a, b) | Expr::Div(a, b) => {
                a.max_var().max(b.max_var())
            }
        }
    }

    /// True if the tree references no variables.
    pub fn is_constant(&self) -> bool {
        self.max_var().is_none()
    }

    /// Rewrites every variable index through `map`.
    pub fn remap_vars(&self, map: &dyn Fn(usize) -> Expr) -> Expr {
        match self {
            Expr::Num(c) => Expr::Num(*c),
            Expr::Var(i) => map(*i),
            Expr::Neg(a) => Expr::neg(a.remap_vars(map)),
            Expr::Add(a, b) => Expr::add(a.remap_vars(map), b.remap_vars(map)),
            Expr::Sub(a, b) => Expr::sub(a.remap_vars(map), b.remap_vars(map)),
            Expr::Mul(a, b) => Expr::mul(a.remap_vars(map), b.remap_vars(map)),
            Expr::Div(a, b) => Expr::div(a.remap_vars(map), b.remap_vars(map)),
            Expr::Pow(a, e) => Expr::pow(a.remap_vars(map), *e),
            Expr::Call(f, a) => Expr::call(*f, a.remap_vars(map)),
        }
    }

    fn precedence(&self) -> u8 {
        match self {
            Expr::Add(..) | Expr::Sub(..) => 1,
            Expr::Mul(..) | Expr::Div(..) => 2,
            Expr::Neg(..) => 3,
            Expr::Pow(..) => 4,
            Expr::Num(..) | Expr::Var(..) | Expr::Call(..) => 5,
        }
    }

    /// Renders the tree with the minimal parenthesization that parses back
    /// to an identical tree.
    pub fn render(&self, coords: &[String]) -> String {
        let mut out = String::new();
        self.write_to(&mut out, coords);
        out
    }

    fn write_to(&self, out: &mut String, coords: &[String]) {
        let wrap = |e: &Expr, paren: bool, out: &mut String| {
            if paren {
                out.push('(');
                e.write_to(out, coords);
                out.push(')');
            } else {
                e.write_to(out, coords);
            }
        };
        match self {
            Expr::Num(c) => out.push_str(&format!("{c}")),
            Expr::Var(i) => match coords.get(*i) {
                Some(name) => out.push_str(name),
                None => out.push_str(&format!("${i}")),
            },
            Expr::Neg(a) => {
                out.push('-');
                wrap(a, a.precedence() < 3, out);
            }
            Expr::Add(a, b) | Expr::Sub(a, b) | Expr::Mul(a, b) | Expr::Div(a, b) => {
                let p = self.precedence();
                let op = match self {
                    Expr::Add(..) => " + ",
                    Expr::Sub(..) => " - ",
                    Expr::Mul(..) => "*",
                    _ => "/",
                };
                wrap(a, a.precedence() < p, out);
                out.push_str(op);
                // Right operands of equal precedence keep their parentheses:
                // all binary operators are left-associative.
                wrap(b, b.precedence() <= p, out);
            }
            Expr::Pow(a, e) => {
                wrap(a, a.precedence() < 5, out);
                out.push('^');
                out.push_str(&e.to_string());
            }
            Expr::Call(f, a) => {
                out.push_str(f.name());
                out.push('(');
                a.write_to(out, coords);
                out.push(')');
            }
        }
    }
}
