//! Exact piecewise-polynomial functions on the line.
//!
//! The corpus objectives are specified by their derivatives on a handful of
//! intervals. Integrating each piece symbolically and fixing the constants by
//! continuity keeps values exact, which is what makes the 1e-12 gluing and
//! replay tests meaningful.

/// Dense polynomial with ascending coefficients: `c[0] + c[1] x + c[2] x² + …`.
#[derive(Debug, Clone, PartialEq)]
pub struct Poly {
    pub coeffs: Vec<f64>,
}

impl Poly {
    pub fn new(coeffs: Vec<f64>) -> Self {
        Poly { coeffs }
    }

    pub fn constant(c: f64) -> Self {
        Poly { coeffs: vec![c] }
    }

    pub fn eval(&self, x: f64) -> f64 {
        let mut acc = 0.0;
        for &c in self.coeffs.iter().rev() {
            acc = acc * x + c;
        }
        acc
    }

    pub fn derivative(&self) -> Poly {
        if self.coeffs.len() <= 1 {
            return Poly::constant(0.0);
        }
        Poly {
            coeffs: self
                .coeffs
                .iter()
                .enumerate()
                .skip(1)
                .map(|(k, &c)| c * k as f64)
                .collect(),
        }
    }

    /// Antiderivative with constant term `c0`.
    pub fn antiderivative(&self, c0: f64) -> Poly {
        let mut coeffs = Vec::with_capacity(self.coeffs.len() + 1);
        coeffs.push(c0);
        for (k, &c) in self.coeffs.iter().enumerate() {
            coeffs.push(c / (k + 1) as f64);
        }
        Poly { coeffs }
    }
}

/// Piecewise polynomial with `breaks.len() + 1` pieces. Piece `i` applies on
/// `[breaks[i-1], breaks[i])`, with the first and last pieces unbounded.
#[derive(Debug, Clone, PartialEq)]
pub struct Piecewise1d {
    pub breaks: Vec<f64>,
    pub pieces: Vec<Poly>,
}

impl Piecewise1d {
    pub fn new(breaks: Vec<f64>, pieces: Vec<Poly>) -> Self {
        assert_eq!(pieces.len(), breaks.len() + 1, "one piece per interval");
        debug_assert!(
            breaks.windows(2).all(|w| w[0] < w[1]),
            "breaks must increase"
        );
        Piecewise1d { breaks, pieces }
    }

    pub fn piece_index(&self, x: f64) -> usize {
        self.breaks.iter().take_while(|&&b| x >= b).count()
    }

    pub fn value(&self, x: f64) -> f64 {
        self.pieces[self.piece_index(x)].eval(x)
    }

    pub fn derivative(&self) -> Piecewise1d {
        Piecewise1d {
            breaks: self.breaks.clone(),
            pieces: self.pieces.iter().map(Poly::derivative).collect(),
        }
    }

    /// Integrate a piecewise derivative into a continuous function anchored at
    /// `value(anchor_x) = anchor_value`. Constants propagate outward from the
    /// anchored piece so every junction glues continuously.
    pub fn integral_of(deriv: &Piecewise1d, anchor_x: f64, anchor_value: f64) -> Piecewise1d {
        let n = deriv.pieces.len();
        let mut pieces: Vec<Poly> = deriv.pieces.iter().map(|p| p.antiderivative(0.0)).collect();
        let anchor_idx = deriv.piece_index(anchor_x);

        let mut shift = vec![0.0; n];
        shift[anchor_idx] = anchor_value - pieces[anchor_idx].eval(anchor_x);
        for i in anchor_idx + 1..n {
            let b = deriv.breaks[i - 1];
            shift[i] = pieces[i - 1].eval(b) + shift[i - 1] - pieces[i].eval(b);
        }
        for i in (0..anchor_idx).rev() {
            let b = deriv.breaks[i];
            shift[i] = pieces[i + 1].eval(b) + shift[i + 1] - pieces[i].eval(b);
        }
        for (p, s) in pieces.iter_mut().zip(shift) {
            p.coeffs[0] += s;
        }
        Piecewise1d {
            breaks: deriv.breaks.clone(),
            pieces,
        }
    }

    /// Largest value/derivative mismatch across the junctions.
    pub fn max_gluing_gap(&self) -> f64 {
        let d = self.derivative();
        let mut worst: f64 = 0.0;
        for (i, &b) in self.breaks.iter().enumerate() {
            let v = (self.pieces[i].eval(b) - self.pieces[i + 1].eval(b)).abs();
            let g = (d.pieces[i].eval(b) - d.pieces[i + 1].eval(b)).abs();
            worst = worst.max(v).max(g);
        }
        worst
    }
}
