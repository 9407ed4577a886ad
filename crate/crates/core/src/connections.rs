//! The Levi-Civita connection of the metric, the semi-symmetric non-metric
//! connection obtained by adding the fundamental-form correction, and the
//! covariant-derivative arrays the identity checks contract against.
//!
//! The corrected connection acts on a vector field as
//! `B_X Y = D_X Y + 'F(X, Y) T` and extends to 1-forms and higher tensors
//! by the usual duality rule `(B_X w)(Y) = X(w(Y)) - w(B_X Y)`, which is
//! what the closed-form torsion and non-metricity expressions implicitly
//! assume; the two-path checks in the registry exercise exactly this.

use crate::fields::{
    self, apply_endomorphism, bilinear_form, fundamental_form_matrix, pairing, FieldError,
    TensorField, Valence,
};
use crate::structure::AlmostContactStructure;
use crate::Scalar;

/// Which connection differentiates: the Levi-Civita connection `D` or the
/// semi-symmetric non-metric connection obtained from it.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Connection {
    LeviCivita,
    SemiSymmetric,
}

/// Per-point connection coefficients: the Levi-Civita symbols and the
/// correction `C^k_{ij} = 'F_{ij} T^k` whose sum gives the semi-symmetric
/// connection. `gamma` is symmetric in its lower pair by construction; the
/// correction inherits the antisymmetry of the fundamental form.
#[derive(Debug, Clone)]
pub struct ConnectionCoefficients<T> {
    pub n: usize,
    pub point: Vec<T>,
    /// `gamma[(k*n + i)*n + j] = Gamma^k_{ij}`.
    pub gamma: Vec<T>,
    /// `correction[(k*n + i)*n + j] = 'F_{ij} T^k`.
    pub correction: Vec<T>,
}

impl<T: Scalar> ConnectionCoefficients<T> {
    /// Coefficient of the requested connection at `(k, i, j)`.
    pub fn coefficient(&self, connection: Connection, k: usize, i: usize, j: usize) -> T {
        let idx = (k * self.n + i) * self.n + j;
        match connection {
            Connection::LeviCivita => self.gamma[idx],
            Connection::SemiSymmetric => self.gamma[idx] + self.correction[idx],
        }
    }
}

/// Levi-Civita symbols from the metric:
/// `Gamma^k_{ij} = 1/2 g^{kl} (d_i g_{jl} + d_j g_{il} - d_l g_{ij})`.
/// Computed for `i <= j` and mirrored, so the symmetry in the lower pair is
/// exact by storage.
pub fn christoffel<T: Scalar>(g: &TensorField, point: &[T]) -> Result<Vec<T>, FieldError> {
    let n = g.chart().dimension();
    let (_, g_inv) = fields::metric_at(g, point)?;
    let dg = g.partials(point)?; // dg[(i*n + j)*n + k] = d_k g_{ij}
    let pd = |i: usize, j: usize, k: usize| dg[(i * n + j) * n + k];
    let half = T::of(0.5);
    let mut gamma = vec![T::zero(); n * n * n];
    for k in 0..n {
        for i in 0..n {
            for j in i..n {
                let mut acc = T::zero();
                for l in 0..n {
                    acc = acc + g_inv[k * n + l] * (pd(j, l, i) + pd(i, l, j) - pd(i, j, l));
                }
                let value = half * acc;
                gamma[(k * n + i) * n + j] = value;
                gamma[(k * n + j) * n + i] = value;
            }
        }
    }
    Ok(gamma)
}

/// Correction term of the semi-symmetric connection from evaluated
/// fundamental-form and structure-vector arrays.
pub fn semi_symmetric_correction<T: Scalar>(n: usize, fprime: &[T], t: &[T]) -> Vec<T> {
    let mut c = vec![T::zero(); n * n * n];
    for k in 0..n {
        for i in 0..n {
            for j in 0..n {
                c[(k * n + i) * n + j] = fprime[i * n + j] * t[k];
            }
        }
    }
    c
}

/// A covariant derivative array: the base field's components with one
/// covariant slot appended in front, `data[k * base_size + I]`, so that
/// contracting the leading slot with a frame vector gives the derivative
/// along that vector. Reduces to plain partials when all coefficients
/// vanish.
#[derive(Debug, Clone)]
pub struct CovariantDerivative<T> {
    pub connection: Connection,
    pub valence: Valence,
    pub n: usize,
    pub data: Vec<T>,
}

impl<T: Scalar> CovariantDerivative<T> {
    /// Contract the derivative slot with a frame vector.
    pub fn along(&self, x: &[T]) -> Vec<T> {
        let size = self.data.len() / self.n;
        let mut out = vec![T::zero(); size];
        for k in 0..self.n {
            for i in 0..size {
                out[i] = out[i] + x[k] * self.data[k * size + i];
            }
        }
        out
    }
}

/// Covariant derivative of a field of valence (1,0), (0,1), (1,1) or (0,2)
/// under the selected connection.
pub fn covariant_derivative<T: Scalar>(
    field: &TensorField,
    point: &[T],
    coeffs: &ConnectionCoefficients<T>,
    connection: Connection,
) -> Result<CovariantDerivative<T>, FieldError> {
    let n = coeffs.n;
    let values = field.evaluate(point)?;
    let partials = field.partials(point)?;
    let c = |k: usize, i: usize, j: usize| coeffs.coefficient(connection, k, i, j);
    let valence = field.valence();
    let size = values.len();
    let mut data = vec![T::zero(); size * n];
    match (valence.contravariant, valence.covariant) {
        (1, 0) => {
            for k in 0..n {
                for i in 0..n {
                    let mut acc = partials[i * n + k];
                    for l in 0..n {
                        acc = acc + c(i, k, l) * values[l];
                    }
                    data[k * size + i] = acc;
                }
            }
        }
        (0, 1) => {
            for k in 0..n {
                for i in 0..n {
                    let mut acc = partials[i * n + k];
                    for l in 0..n {
                        acc = acc - c(l, k, i) * values[l];
                    }
                    data[k * size + i] = acc;
                }
            }
        }
        (1, 1) => {
            for k in 0..n {
                for i in 0..n {
                    for j in 0..n {
                        let mut acc = partials[(i * n + j) * n + k];
                        for l in 0..n {
                            acc = acc + c(i, k, l) * values[l * n + j]
                                - c(l, k, j) * values[i * n + l];
                        }
                        data[k * size + i * n + j] = acc;
                    }
                }
            }
        }
        (0, 2) => {
            for k in 0..n {
                for i in 0..n {
                    for j in 0..n {
                        let mut acc = partials[(i * n + j) * n + k];
                        for l in 0..n {
                            acc = acc
                                - c(l, k, i) * values[l * n + j]
                                - c(l, k, j) * values[i * n + l];
                        }
                        data[k * size + i * n + j] = acc;
                    }
                }
            }
        }
        (p, q) => return Err(FieldError::UnsupportedValence { p, q }),
    }
    Ok(CovariantDerivative {
        connection,
        valence,
        n,
        data,
    })
}

/// Everything the identity evaluators need at one sample point: evaluated
/// structure arrays, connection coefficients, and the covariant-derivative
/// arrays of `'F`, `A`, `F` and `g` under both connections.
#[derive(Debug, Clone)]
pub struct PointContext<T> {
    pub n: usize,
    pub point: Vec<T>,
    pub f: Vec<T>,
    pub t: Vec<T>,
    pub a: Vec<T>,
    pub g: Vec<T>,
    pub g_inv: Vec<T>,
    pub fprime: Vec<T>,
    pub coeffs: ConnectionCoefficients<T>,
    /// `d_fprime[(k*n + i)*n + j] = (D_{e_k} 'F)(e_i, e_j)`.
    pub d_fprime: Vec<T>,
    pub b_fprime: Vec<T>,
    /// `d_a[k*n + i] = (D_{e_k} A)(e_i)`.
    pub d_a: Vec<T>,
    pub b_a: Vec<T>,
    /// `d_f[(k*n + i)*n + j] = (D_{e_k} F)^i_j`.
    pub d_f: Vec<T>,
    pub b_f: Vec<T>,
    pub d_g: Vec<T>,
    pub b_g: Vec<T>,
}

impl<T: Scalar> PointContext<T> {
    pub fn new(s: &AlmostContactStructure, point: &[T]) -> Result<PointContext<T>, FieldError> {
        let n = s.chart().dimension();
        let f = s.f().evaluate(point)?;
        let t = s.t().evaluate(point)?;
        let a = s.a().evaluate(point)?;
        let (g, g_inv) = fields::metric_at(s.g(), point)?;
        let fprime = fundamental_form_matrix(n, &g, &f);
        let gamma = christoffel(s.g(), point)?;
        let correction = semi_symmetric_correction(n, &fprime, &t);
        let coeffs = ConnectionCoefficients {
            n,
            point: point.to_vec(),
            gamma,
            correction,
        };
        let cd = |field: &TensorField, conn| {
            covariant_derivative(field, point, &coeffs, conn).map(|d| d.data)
        };
        let d_fprime = cd(s.fprime(), Connection::LeviCivita)?;
        let b_fprime = cd(s.fprime(), Connection::SemiSymmetric)?;
        let d_a = cd(s.a(), Connection::LeviCivita)?;
        let b_a = cd(s.a(), Connection::SemiSymmetric)?;
        let d_f = cd(s.f(), Connection::LeviCivita)?;
        let b_f = cd(s.f(), Connection::SemiSymmetric)?;
        let d_g = cd(s.g(), Connection::LeviCivita)?;
        let b_g = cd(s.g(), Connection::SemiSymmetric)?;
        Ok(PointContext {
            n,
            point: point.to_vec(),
            f,
            t,
            a,
            g,
            g_inv,
            fprime,
            coeffs,
            d_fprime,
            b_fprime,
            d_a,
            b_a,
            d_f,
            b_f,
            d_g,
            b_g,
        })
    }

    /// The overbar map `v -> F v`.
    pub fn bar(&self, v: &[T]) -> Vec<T> {
        apply_endomorphism(self.n, &self.f, v)
    }

    pub fn a_of(&self, v: &[T]) -> T {
        pairing(&self.a, v)
    }

    pub fn g_of(&self, x: &[T], y: &[T]) -> T {
        bilinear_form(self.n, &self.g, x, y)
    }

    pub fn fprime_of(&self, x: &[T], y: &[T]) -> T {
        bilinear_form(self.n, &self.fprime, x, y)
    }

    /// Contract a rank-2 derivative array: `(∇_X A)(v)`.
    pub fn deriv2(&self, arr: &[T], x: &[T], v: &[T]) -> T {
        let n = self.n;
        let mut acc = T::zero();
        for k in 0..n {
            for i in 0..n {
                acc = acc + arr[k * n + i] * x[k] * v[i];
            }
        }
        acc
    }

    /// Contract a rank-3 derivative array: `(∇_X 'F)(u, v)`.
    pub fn deriv3(&self, arr: &[T], x: &[T], u: &[T], v: &[T]) -> T {
        let n = self.n;
        let mut acc = T::zero();
        for k in 0..n {
            for i in 0..n {
                for j in 0..n {
                    acc = acc + arr[(k * n + i) * n + j] * x[k] * u[i] * v[j];
                }
            }
        }
        acc
    }

    /// Contract a (1,1)-valued derivative array to the vector `(∇_X F)(Y)`.
    pub fn deriv_endo(&self, arr: &[T], x: &[T], y: &[T]) -> Vec<T> {
        let n = self.n;
        let mut out = vec![T::zero(); n];
        for k in 0..n {
            for i in 0..n {
                for j in 0..n {
                    out[i] = out[i] + arr[(k * n + i) * n + j] * x[k] * y[j];
                }
            }
        }
        out
    }

    /// Max component magnitude of `(∇_T F)` for the chosen connection.
    pub fn derivative_along_t_of_f(&self, connection: Connection) -> T {
        let arr = match connection {
            Connection::LeviCivita => &self.d_f,
            Connection::SemiSymmetric => &self.b_f,
        };
        let n = self.n;
        let mut worst = T::zero();
        for i in 0..n {
            for j in 0..n {
                let mut acc = T::zero();
                for k in 0..n {
                    acc = acc + self.t[k] * arr[(k * n + i) * n + j];
                }
                worst = worst.max(acc.abs());
            }
        }
        worst
    }
}

/// Torsion of the semi-symmetric connection from its coefficients, for
/// frame vectors constant at the point (the bracket term vanishes). The
/// `i < j` pairing makes `S(X, X) = 0` exact and the swap `X <-> Y` an
/// exact negation.
pub fn torsion_vector<T: Scalar>(cx: &PointContext<T>, x: &[T], y: &[T]) -> Vec<T> {
    let n = cx.n;
    let mut out = vec![T::zero(); n];
    for k in 0..n {
        let mut acc = T::zero();
        for i in 0..n {
            for j in (i + 1)..n {
                let anti = cx.coeffs.coefficient(Connection::SemiSymmetric, k, i, j)
                    - cx.coeffs.coefficient(Connection::SemiSymmetric, k, j, i);
                acc = acc + anti * (x[i] * y[j] - x[j] * y[i]);
            }
        }
        out[k] = acc;
    }
    out
}

/// The (0,3) torsion form `g(S(X, Y), Z)`.
pub fn torsion_form<T: Scalar>(cx: &PointContext<T>, x: &[T], y: &[T], z: &[T]) -> T {
    let s = torsion_vector(cx, x, y);
    bilinear_form(cx.n, &cx.g, &s, z)
}

/// Non-metricity `(B_X g)(Y, Z)` through the coefficient route.
pub fn nonmetricity_value<T: Scalar>(cx: &PointContext<T>, x: &[T], y: &[T], z: &[T]) -> T {
    cx.deriv3(&cx.b_g, x, y, z)
}
