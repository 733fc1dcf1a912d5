#include "swingup/hilbert.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "swingup/accum.hpp"

namespace swingup {

TruncationWindow centered_window(int n_center, int half_width) {
    return {std::max(0, n_center - half_width), n_center + half_width};
}

ProductBasis::Label ProductBasis::label(int index) const {
    const int lev = index / block();
    const int rem = index % block();
    return {static_cast<EmitterLevel>(lev), window1.n_min + rem / m2(),
            window2.n_min + rem % m2()};
}

ProductBasis build_basis(TruncationWindow w1, TruncationWindow w2) {
    auto check = [](const TruncationWindow& w, const char* name) {
        if (w.n_min < 0 || w.n_max < w.n_min) {
            std::ostringstream os;
            os << name << " = [" << w.n_min << ".." << w.n_max
               << "] is not a valid truncation window";
            throw ValidationError(os.str());
        }
    };
    check(w1, "window1");
    check(w2, "window2");
    return {w1, w2};
}

double mean_occupation(const FieldInit& init) {
    if (const auto* f = std::get_if<FockInit>(&init)) return static_cast<double>(f->n);
    return std::norm(std::get<CoherentInit>(init).alpha);
}

bool is_fock(const FieldInit& init) { return std::holds_alternative<FockInit>(init); }

std::string field_init_to_string(const FieldInit& init) {
    std::ostringstream os;
    if (const auto* f = std::get_if<FockInit>(&init)) {
        os << "fock(" << f->n << ")";
    } else {
        const auto& c = std::get<CoherentInit>(init);
        os << "coherent(|alpha|^2=" << std::norm(c.alpha) << ")";
    }
    return os.str();
}

double StateVector::norm() const { return std::sqrt(detail::norm_squared(amplitudes)); }

void StateVector::normalize() {
    const double n = norm();
    if (n == 0.0) return;
    const double inv = 1.0 / n;
    for (auto& a : amplitudes) a *= inv;
}

cx StateVector::inner(const StateVector& other) const {
    if (basis != other.basis) throw BasisMismatch("inner product between different bases");
    detail::KahanSum re, im;
    for (size_t i = 0; i < amplitudes.size(); ++i) {
        const cx v = std::conj(amplitudes[i]) * other.amplitudes[i];
        re.add(v.real());
        im.add(v.imag());
    }
    return {re.value(), im.value()};
}

StateVector zero_state(const ProductBasis& basis) {
    return {basis, std::vector<cx>(basis.dimension(), cx(0.0, 0.0))};
}

namespace {

// Single-mode amplitudes over the window, unnormalized except for Fock.
// Coherent: c_n = alpha^n / sqrt(n!) evaluated in log space; the window must
// retain at least 1 - trunc_tol of the Poisson mass.
std::vector<cx> mode_amplitudes(const TruncationWindow& w, const FieldInit& init,
                                const char* mode_name) {
    std::vector<cx> amps(w.size(), cx(0.0, 0.0));
    if (const auto* f = std::get_if<FockInit>(&init)) {
        if (!w.contains(f->n)) {
            std::ostringstream os;
            os << mode_name << ": Fock occupation n=" << f->n << " outside window ["
               << w.n_min << ".." << w.n_max << "]";
            throw WindowTooSmall(os.str());
        }
        amps[f->n - w.n_min] = cx(1.0, 0.0);
        return amps;
    }

    const auto& c = std::get<CoherentInit>(init);
    const double lambda = std::norm(c.alpha);
    if (lambda == 0.0) {
        if (!w.contains(0)) {
            std::ostringstream os;
            os << mode_name << ": vacuum (alpha=0) outside window [" << w.n_min << ".."
               << w.n_max << "]";
            throw WindowTooSmall(os.str());
        }
        amps[0 - w.n_min] = cx(1.0, 0.0);
        return amps;
    }

    const double log_mag = 0.5 * std::log(lambda);
    const double phase = std::arg(c.alpha);
    detail::KahanSum mass;
    for (int n = w.n_min; n <= w.n_max; ++n) {
        // log |c_n| relative to the e^{-lambda/2} prefactor
        const double lp = n * log_mag - 0.5 * std::lgamma(n + 1.0) - 0.5 * lambda;
        amps[n - w.n_min] = std::polar(std::exp(lp), n * phase);
        mass.add(std::exp(2.0 * lp));
    }
    const double lost = 1.0 - mass.value();
    if (lost > c.trunc_tol) {
        const int suggested = static_cast<int>(std::ceil(lambda + 10.0 * std::sqrt(lambda))) + 10;
        std::ostringstream os;
        os << mode_name << ": coherent state |alpha|^2=" << lambda << " loses " << lost
           << " of its norm on window [" << w.n_min << ".." << w.n_max
           << "] (allowed " << c.trunc_tol << "); widen to roughly [0.." << suggested << "]";
        throw WindowTooSmall(os.str());
    }
    return amps;
}

}  // namespace

StateVector init_state(const ProductBasis& basis, EmitterLevel level, const FieldInit& f1,
                       const FieldInit& f2) {
    const auto c1 = mode_amplitudes(basis.window1, f1, "mode 1");
    const auto c2 = mode_amplitudes(basis.window2, f2, "mode 2");
    StateVector state = zero_state(basis);
    const int offset = static_cast<int>(level) * basis.block();
    const int m2 = basis.m2();
    for (int a = 0; a < basis.m1(); ++a)
        for (int b = 0; b < m2; ++b) state.amplitudes[offset + a * m2 + b] = c1[a] * c2[b];
    state.normalize();
    return state;
}

namespace detail {

std::vector<double> sqrt_table(const TruncationWindow& w) {
    std::vector<double> sq(w.size() + 1);
    for (int a = 0; a <= w.size(); ++a) sq[a] = std::sqrt(static_cast<double>(w.n_min + a));
    return sq;
}

void add_raising_term(const ProductBasis& basis, int mode, cx coeff,
                      const std::vector<double>& sqrt_n, const cx* in, cx* out,
                      double* leaked) {
    const int m1 = basis.m1(), m2 = basis.m2(), block = basis.block();
    const cx* g = in;          // ground block
    cx* x = out + block;       // excited block
    if (mode == 1) {
        // (G, n1, n2) -> (X, n1 - 1, n2) with sqrt(n1)
        for (int a = 1; a < m1; ++a) {
            const cx ca = coeff * sqrt_n[a];
            for (int b = 0; b < m2; ++b) x[(a - 1) * m2 + b] += ca * g[a * m2 + b];
        }
        if (leaked && basis.window1.n_min > 0) {
            const double w = std::norm(coeff) * basis.window1.n_min;
            KahanSum s;
            for (int b = 0; b < m2; ++b) s.add(w * std::norm(g[b]));
            *leaked += s.value();
        }
    } else {
        for (int a = 0; a < m1; ++a) {
            const cx* row = g + a * m2;
            cx* orow = x + a * m2;
            for (int b = 1; b < m2; ++b) orow[b - 1] += coeff * sqrt_n[b] * row[b];
        }
        if (leaked && basis.window2.n_min > 0) {
            const double w = std::norm(coeff) * basis.window2.n_min;
            KahanSum s;
            for (int a = 0; a < m1; ++a) s.add(w * std::norm(g[a * m2]));
            *leaked += s.value();
        }
    }
}

void add_lowering_term(const ProductBasis& basis, int mode, cx coeff,
                       const std::vector<double>& sqrt_n, const cx* in, cx* out,
                       double* leaked) {
    const int m1 = basis.m1(), m2 = basis.m2(), block = basis.block();
    const cx* x = in + block;  // excited block
    cx* g = out;               // ground block
    if (mode == 1) {
        // (X, n1, n2) -> (G, n1 + 1, n2) with sqrt(n1 + 1)
        for (int a = 0; a < m1 - 1; ++a) {
            const cx ca = coeff * sqrt_n[a + 1];
            for (int b = 0; b < m2; ++b) g[(a + 1) * m2 + b] += ca * x[a * m2 + b];
        }
        if (leaked) {
            const double w = std::norm(coeff) * (basis.window1.n_max + 1);
            KahanSum s;
            for (int b = 0; b < m2; ++b) s.add(w * std::norm(x[(m1 - 1) * m2 + b]));
            *leaked += s.value();
        }
    } else {
        for (int a = 0; a < m1; ++a) {
            const cx* row = x + a * m2;
            cx* orow = g + a * m2;
            for (int b = 0; b < m2 - 1; ++b) orow[b + 1] += coeff * sqrt_n[b + 1] * row[b];
        }
        if (leaked) {
            const double w = std::norm(coeff) * (basis.window2.n_max + 1);
            KahanSum s;
            for (int a = 0; a < m1; ++a) s.add(w * std::norm(x[a * m2 + (m2 - 1)]));
            *leaked += s.value();
        }
    }
}

double norm_squared(const std::vector<cx>& amplitudes) {
    KahanSum s;
    for (const cx& a : amplitudes) s.add(std::norm(a));
    return s.value();
}

}  // namespace detail

namespace {

StateVector apply_term(const StateVector& state, int mode, bool raising, double* leaked) {
    if (mode != 1 && mode != 2) throw std::invalid_argument("mode must be 1 or 2");
    StateVector out = zero_state(state.basis);
    const auto sq = detail::sqrt_table(mode == 1 ? state.basis.window1 : state.basis.window2);
    if (raising) {
        detail::add_raising_term(state.basis, mode, cx(1.0, 0.0), sq, state.amplitudes.data(),
                                 out.amplitudes.data(), leaked);
    } else {
        detail::add_lowering_term(state.basis, mode, cx(1.0, 0.0), sq, state.amplitudes.data(),
                                  out.amplitudes.data(), leaked);
    }
    return out;
}

}  // namespace

StateVector apply_raising_term(const StateVector& state, int mode, double* leaked) {
    return apply_term(state, mode, true, leaked);
}

StateVector apply_lowering_term(const StateVector& state, int mode, double* leaked) {
    return apply_term(state, mode, false, leaked);
}

}  // namespace swingup
