#pragma once

// 2x2 Jones/density-matrix algebra over the polarization basis (|H>, |V>).

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <string>

#include "qi/errors.hpp"

namespace qi {

using Complex = std::complex<double>;

/// Tolerance for invariants of freshly constructed operators and states.
inline constexpr double kConstructorTol = 1e-12;
/// Tolerance for results of several chained products.
inline constexpr double kCompositeTol = 1e-10;

namespace detail {

inline void require_finite(double x, const char* what) {
    if (!std::isfinite(x)) {
        throw DomainError(std::string(what) + " must be finite");
    }
}

inline void require_unit_interval(double x, const char* what) {
    require_finite(x, what);
    if (x < 0.0 || x > 1.0) {
        throw DomainError(std::string(what) + " must lie in [0, 1], got " + std::to_string(x));
    }
}

} // namespace detail

/// Dense 2x2 complex matrix, row-major.
struct Mat2 {
    std::array<Complex, 4> e{};

    constexpr Mat2() = default;
    constexpr Mat2(Complex a, Complex b, Complex c, Complex d) : e{a, b, c, d} {}

    static constexpr Mat2 identity() { return {1.0, 0.0, 0.0, 1.0}; }
    static constexpr Mat2 zero() { return {}; }
    static constexpr Mat2 diagonal(Complex a, Complex d) { return {a, 0.0, 0.0, d}; }

    constexpr Complex& operator()(int r, int c) { return e[2 * r + c]; }
    constexpr const Complex& operator()(int r, int c) const { return e[2 * r + c]; }

    Mat2 adjoint() const {
        return {std::conj(e[0]), std::conj(e[2]), std::conj(e[1]), std::conj(e[3])};
    }
    Complex trace() const { return e[0] + e[3]; }
    Complex det() const { return e[0] * e[3] - e[1] * e[2]; }

    bool is_finite() const {
        return std::all_of(e.begin(), e.end(), [](const Complex& z) {
            return std::isfinite(z.real()) && std::isfinite(z.imag());
        });
    }

    friend Mat2 operator*(const Mat2& a, const Mat2& b) {
        return {a.e[0] * b.e[0] + a.e[1] * b.e[2], a.e[0] * b.e[1] + a.e[1] * b.e[3],
                a.e[2] * b.e[0] + a.e[3] * b.e[2], a.e[2] * b.e[1] + a.e[3] * b.e[3]};
    }
    friend Mat2 operator+(const Mat2& a, const Mat2& b) {
        return {a.e[0] + b.e[0], a.e[1] + b.e[1], a.e[2] + b.e[2], a.e[3] + b.e[3]};
    }
    friend Mat2 operator-(const Mat2& a, const Mat2& b) {
        return {a.e[0] - b.e[0], a.e[1] - b.e[1], a.e[2] - b.e[2], a.e[3] - b.e[3]};
    }
    friend Mat2 operator*(Complex s, const Mat2& a) {
        return {s * a.e[0], s * a.e[1], s * a.e[2], s * a.e[3]};
    }
};

/// Largest elementwise modulus of a - b.
inline double max_abs_diff(const Mat2& a, const Mat2& b) {
    double m = 0.0;
    for (std::size_t i = 0; i < 4; ++i) m = std::max(m, std::abs(a.e[i] - b.e[i]));
    return m;
}

inline bool is_hermitian(const Mat2& m, double tol) { return max_abs_diff(m, m.adjoint()) <= tol; }

inline bool is_unitary(const Mat2& m, double tol) {
    return max_abs_diff(m.adjoint() * m, Mat2::identity()) <= tol;
}

/// Eigenvalues (ascending) of the Hermitian part of m.
inline std::array<double, 2> hermitian_eigenvalues(const Mat2& m) {
    const double a = m(0, 0).real();
    const double d = m(1, 1).real();
    const Complex b = 0.5 * (m(0, 1) + std::conj(m(1, 0)));
    const double mid = 0.5 * (a + d);
    const double rad = std::hypot(0.5 * (a - d), std::abs(b));
    return {mid - rad, mid + rad};
}

/// A pure polarization state as a column vector over (|H>, |V>).
struct Ket {
    Complex h{1.0};
    Complex v{0.0};
};

inline Complex inner(const Ket& a, const Ket& b) { return std::conj(a.h) * b.h + std::conj(a.v) * b.v; }
inline Ket operator*(const Mat2& m, const Ket& k) { return {m(0, 0) * k.h + m(0, 1) * k.v, m(1, 0) * k.h + m(1, 1) * k.v}; }
inline double norm(const Ket& k) { return std::sqrt(std::norm(k.h) + std::norm(k.v)); }

/// |psi><phi|
inline Mat2 outer(const Ket& psi, const Ket& phi) {
    return {psi.h * std::conj(phi.h), psi.h * std::conj(phi.v), psi.v * std::conj(phi.h), psi.v * std::conj(phi.v)};
}

/// Linear polarization state cos(theta)|H> + sin(theta)|V>.
inline Ket linear_ket(double theta) { return {std::cos(theta), std::sin(theta)}; }

enum class OperatorKind { polarizer, hwp, phase, absorber, general };

inline const char* to_string(OperatorKind k) {
    switch (k) {
    case OperatorKind::polarizer: return "polarizer";
    case OperatorKind::hwp: return "hwp";
    case OperatorKind::phase: return "phase";
    case OperatorKind::absorber: return "absorber";
    case OperatorKind::general: return "general";
    }
    return "unknown";
}

/// Jones matrix of a bench element, tagged with the element family it came from.
class OpticalOperator {
public:
    explicit OpticalOperator(const Mat2& m, OperatorKind kind = OperatorKind::general) : m_(m), kind_(kind) {
        if (!m_.is_finite()) throw DomainError("optical operator has non-finite entries");
    }

    const Mat2& matrix() const noexcept { return m_; }
    OperatorKind kind() const noexcept { return kind_; }
    Complex operator()(int r, int c) const { return m_(r, c); }

    /// Composition: (a * b) acts as b first, then a.
    friend OpticalOperator operator*(const OpticalOperator& a, const OpticalOperator& b) {
        return OpticalOperator(a.m_ * b.m_, OperatorKind::general);
    }

private:
    Mat2 m_;
    OperatorKind kind_;
};

/// Checks the structural invariants implied by the operator's kind.
inline bool satisfies_kind_invariants(const OpticalOperator& op, double tol = kConstructorTol) {
    const Mat2& m = op.matrix();
    switch (op.kind()) {
    case OperatorKind::polarizer: {
        const auto ev = hermitian_eigenvalues(m);
        return is_hermitian(m, tol) && max_abs_diff(m * m, m) <= tol && std::abs(ev[0]) <= tol &&
               std::abs(ev[1] - 1.0) <= tol;
    }
    case OperatorKind::hwp:
        return is_unitary(m, tol);
    case OperatorKind::phase:
        return std::abs(m(0, 1)) <= tol && std::abs(m(1, 0)) <= tol && std::abs(std::abs(m(0, 0)) - 1.0) <= tol &&
               std::abs(std::abs(m(1, 1)) - 1.0) <= tol;
    case OperatorKind::absorber:
        return std::abs(m(0, 1)) <= tol && std::abs(m(1, 0)) <= tol && std::abs(m(0, 0)) <= 1.0 + tol &&
               std::abs(m(1, 1)) <= 1.0 + tol;
    case OperatorKind::general:
        return true;
    }
    return false;
}

/// Hermitian PSD 2x2 state with trace in [0, 1]; sub-normalized after lossy elements.
class DensityMatrix2 {
public:
    /// Validates m against the state invariants at tolerance tol and stores its Hermitian part.
    static DensityMatrix2 from_matrix(const Mat2& m, double tol = kCompositeTol) {
        if (!m.is_finite()) throw ConsistencyError("density matrix has non-finite entries");
        if (!is_hermitian(m, tol)) throw ConsistencyError("density matrix is not Hermitian");
        const auto ev = hermitian_eigenvalues(m);
        if (ev[0] < -tol) throw ConsistencyError("density matrix has a negative eigenvalue");
        const double tr = m.trace().real();
        if (tr < -tol || tr > 1.0 + tol) throw ConsistencyError("density matrix trace outside [0, 1]");
        return DensityMatrix2(0.5 * (m + m.adjoint()));
    }

    static DensityMatrix2 pure(const Ket& k) {
        const double n = norm(k);
        if (!(n > 0.0)) throw DomainError("cannot build a state from the zero vector");
        const Ket u{k.h / n, k.v / n};
        return from_matrix(outer(u, u), kConstructorTol);
    }

    const Mat2& matrix() const noexcept { return m_; }
    Complex operator()(int r, int c) const { return m_(r, c); }
    double trace() const { return m_.trace().real(); }
    /// Tr(rho^2) of the normalized state.
    double purity() const {
        const double tr = trace();
        if (tr <= 0.0) return 0.0;
        return ((m_ * m_).trace().real()) / (tr * tr);
    }

    /// Multiplies the coherences by gamma in [0, 1]; gamma = 0 is complete dephasing.
    DensityMatrix2 dephased(double gamma) const {
        detail::require_unit_interval(gamma, "contrast");
        Mat2 m = m_;
        m(0, 1) *= gamma;
        m(1, 0) *= gamma;
        return DensityMatrix2(m);
    }

private:
    explicit DensityMatrix2(const Mat2& m) : m_(m) {}
    Mat2 m_;
};

// ---------------------------------------------------------------------------
// Constructors
// ---------------------------------------------------------------------------

/// epsilon |H><H| + (1 - epsilon) I/2. Note epsilon is a mixing weight; Tr(rho^2) = (1 + epsilon^2)/2.
inline DensityMatrix2 make_initial(double epsilon) {
    detail::require_unit_interval(epsilon, "epsilon");
    const double mixed = 0.5 * (1.0 - epsilon);
    return DensityMatrix2::from_matrix(Mat2::diagonal(epsilon + mixed, mixed), kConstructorTol);
}

inline OpticalOperator make_polarizer(double theta) {
    detail::require_finite(theta, "polarizer angle");
    const double c = std::cos(theta);
    const double s = std::sin(theta);
    return OpticalOperator({c * c, c * s, c * s, s * s}, OperatorKind::polarizer);
}

/// Half-wave plate with fast axis at alpha, as the real reflection [[cos2a, sin2a], [sin2a, -cos2a]].
inline OpticalOperator make_hwp(double alpha) {
    detail::require_finite(alpha, "wave plate angle");
    const double c = std::cos(2.0 * alpha);
    const double s = std::sin(2.0 * alpha);
    return OpticalOperator({c, s, s, -c}, OperatorKind::hwp);
}

/// Beam-displacing prism: relative phase phi on |V>.
inline OpticalOperator make_bdp(double phi) {
    detail::require_finite(phi, "prism phase");
    return OpticalOperator(Mat2::diagonal(1.0, std::polar(1.0, phi)), OperatorKind::phase);
}

/// Absorber in the |V> arm with transmittance mu and phase delta.
inline OpticalOperator make_absorber(double mu, double delta) {
    detail::require_unit_interval(mu, "transmittance");
    detail::require_finite(delta, "absorber phase");
    return OpticalOperator(Mat2::diagonal(1.0, std::polar(std::sqrt(mu), delta)), OperatorKind::absorber);
}

/// Absorbers in both arms sharing a common phase delta.
inline OpticalOperator make_two_arm_absorber(double mu1, double mu2, double delta) {
    detail::require_unit_interval(mu1, "transmittance mu1");
    detail::require_unit_interval(mu2, "transmittance mu2");
    detail::require_finite(delta, "absorber phase");
    const Complex g = std::polar(1.0, delta);
    return OpticalOperator(Mat2::diagonal(g * std::sqrt(mu1), g * std::sqrt(mu2)), OperatorKind::absorber);
}

// ---------------------------------------------------------------------------
// Evolution and decomposition
// ---------------------------------------------------------------------------

/// O rho O^dagger.
inline DensityMatrix2 apply(const OpticalOperator& op, const DensityMatrix2& rho) {
    const Mat2& o = op.matrix();
    return DensityMatrix2::from_matrix(o * rho.matrix() * o.adjoint(), kCompositeTol);
}

/// Tr(rho P), real part.
inline double expectation(const DensityMatrix2& rho, const OpticalOperator& op) {
    return (rho.matrix() * op.matrix()).trace().real();
}

struct PolarDecomposition {
    OpticalOperator unitary;
    OpticalOperator hermitian;
    /// True when F was rank deficient and the unitary factor was completed on the kernel.
    bool singular = false;
};

/// Principal square root of a Hermitian PSD 2x2 matrix.
inline Mat2 psd_sqrt(const Mat2& m) {
    const double det = std::max(m.det().real(), 0.0);
    const double s = std::sqrt(det);
    const double t2 = m.trace().real() + 2.0 * s;
    if (!(t2 > 0.0)) return Mat2::zero();
    const double t = std::sqrt(t2);
    return (1.0 / t) * (m + Mat2::diagonal(s, s));
}

namespace detail {

/// Unit vector orthogonal to w, with the phase fixed so that perp(perp(w)) = -w.
inline Ket perp(const Ket& w) { return {-std::conj(w.v), std::conj(w.h)}; }

/// Eigenvector of Hermitian m for its largest eigenvalue.
inline Ket top_eigenvector(const Mat2& m) {
    const auto ev = hermitian_eigenvalues(m);
    const double a = m(0, 0).real();
    const double d = m(1, 1).real();
    const Complex b = m(0, 1);
    Ket v;
    if (std::abs(b) > 1e-300 * std::max(1.0, ev[1])) {
        v = {b, ev[1] - a};
        if (norm(v) < std::abs(b) * 1e-8) v = {ev[1] - d, std::conj(b)};
    } else {
        v = a >= d ? Ket{1.0, 0.0} : Ket{0.0, 1.0};
    }
    const double n = norm(v);
    return {v.h / n, v.v / n};
}

} // namespace detail

/// F = U R with R = sqrt(F^dagger F). For rank-deficient F the unitary factor maps the kernel
/// onto the orthogonal complement of the range, reducing to the identity on the kernel when
/// range and co-range coincide; F = 0 gives U = I.
inline PolarDecomposition polar_decompose(const OpticalOperator& f) {
    const Mat2& F = f.matrix();
    const Mat2 gram = F.adjoint() * F;
    const Mat2 r = psd_sqrt(gram);
    const double scale = gram.trace().real();
    const double det_abs = std::abs(F.det());

    if (det_abs > 1e-12 * scale) {
        const Complex dr = r.det();
        const Mat2 r_inv = (1.0 / dr) * Mat2{r(1, 1), -r(0, 1), -r(1, 0), r(0, 0)};
        return {OpticalOperator(F * r_inv), OpticalOperator(r), false};
    }
    if (!(scale > 0.0)) {
        return {OpticalOperator(Mat2::identity()), OpticalOperator(Mat2::zero()), true};
    }
    const Ket v = detail::top_eigenvector(gram);
    const Ket fv = F * v;
    const double sigma = norm(fv);
    const Ket u{fv.h / sigma, fv.v / sigma};
    const Mat2 U = outer(u, v) + outer(detail::perp(u), detail::perp(v));
    return {OpticalOperator(U), OpticalOperator(r), true};
}

} // namespace qi
