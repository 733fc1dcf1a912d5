#pragma once

#include <complex>
#include <string>
#include <variant>
#include <vector>

#include "swingup/errors.hpp"

namespace swingup {

using cx = std::complex<double>;

// Two-level emitter: ground |G> and excited |X>.
enum class EmitterLevel : int { Ground = 0, Excited = 1 };

// Retained photon-number range [n_min, n_max] for one field mode.
struct TruncationWindow {
    int n_min = 0;
    int n_max = 0;

    int size() const { return n_max - n_min + 1; }
    bool contains(int n) const { return n >= n_min && n <= n_max; }
    bool operator==(const TruncationWindow&) const = default;
};

// [max(0, n - half_width), n + half_width]
TruncationWindow centered_window(int n_center, int half_width);

// Composite basis {G, X} x {mode-1 window} x {mode-2 window} with the fixed
// layout  index(level, n1, n2) = level*M1*M2 + (n1 - n1_min)*M2 + (n2 - n2_min),
// level in {G -> 0, X -> 1}. The layout is part of the file-format contract;
// do not change it.
struct ProductBasis {
    TruncationWindow window1;
    TruncationWindow window2;

    int m1() const { return window1.size(); }
    int m2() const { return window2.size(); }
    int block() const { return m1() * m2(); }
    int dimension() const { return 2 * block(); }

    int index(EmitterLevel level, int n1, int n2) const {
        return static_cast<int>(level) * block() + (n1 - window1.n_min) * m2() +
               (n2 - window2.n_min);
    }

    struct Label {
        EmitterLevel level;
        int n1;
        int n2;
    };
    Label label(int index) const;

    bool operator==(const ProductBasis&) const = default;
};

// Validates the windows and returns the basis.
ProductBasis build_basis(TruncationWindow w1, TruncationWindow w2);

// Initial condition of one field mode.
struct FockInit {
    int n = 0;
    bool operator==(const FockInit&) const = default;
};
struct CoherentInit {
    cx alpha;                  // |alpha|^2 = mean photon number
    double trunc_tol = 1e-12;  // max norm lost to window truncation
    bool operator==(const CoherentInit&) const = default;
};
using FieldInit = std::variant<FockInit, CoherentInit>;

double mean_occupation(const FieldInit& init);
bool is_fock(const FieldInit& init);
std::string field_init_to_string(const FieldInit& init);

// Normalized complex amplitude vector over a ProductBasis.
struct StateVector {
    ProductBasis basis;
    std::vector<cx> amplitudes;

    double norm() const;
    void normalize();
    cx inner(const StateVector& other) const;  // <this|other>
};

StateVector zero_state(const ProductBasis& basis);

// Normalized product state |level> x |f1> x |f2>. Coherent amplitudes are
// alpha^n / sqrt(n!) restricted to the window, then renormalized; throws
// WindowTooSmall if the window loses more than the configured norm.
StateVector init_state(const ProductBasis& basis, EmitterLevel level, const FieldInit& f1,
                       const FieldInit& f2);

// sigma^dag a_j: amplitude on (X, ..., n_j - 1, ...) picks up sqrt(n_j) times
// the input amplitude on (G, ..., n_j, ...). Components pushed outside the
// window are dropped; their squared weight is added to *leaked if given.
StateVector apply_raising_term(const StateVector& state, int mode, double* leaked = nullptr);

// sigma a_j^dag, the Hermitian conjugate: coefficient sqrt(n_j + 1) from
// (X, n_j) to (G, n_j + 1).
StateVector apply_lowering_term(const StateVector& state, int mode, double* leaked = nullptr);

namespace detail {

// sqrt(n) lookup for the ladder coefficients of one window; index a maps to
// photon number n_min + a, with one extra slot so sqrt(n_max + 1) is in range.
std::vector<double> sqrt_table(const TruncationWindow& w);

// out += coeff * (sigma^dag a_mode) in, dropped weight accumulated into *leaked.
void add_raising_term(const ProductBasis& basis, int mode, cx coeff,
                      const std::vector<double>& sqrt_n, const cx* in, cx* out, double* leaked);

// out += coeff * (sigma a_mode^dag) in.
void add_lowering_term(const ProductBasis& basis, int mode, cx coeff,
                       const std::vector<double>& sqrt_n, const cx* in, cx* out, double* leaked);

double norm_squared(const std::vector<cx>& amplitudes);

}  // namespace detail

}  // namespace swingup
