#include <cmath>
#include <random>

#include "doctest.h"
#include "swingup/dynamics.hpp"
#include "swingup/observables.hpp"

using namespace swingup;

namespace {

StateVector random_state(const ProductBasis& basis, unsigned seed) {
    std::mt19937 rng(seed);
    std::normal_distribution<double> nd;
    StateVector s = zero_state(basis);
    for (auto& a : s.amplitudes) a = cx(nd(rng), nd(rng));
    s.normalize();
    return s;
}

// Dense interaction Hamiltonian assembled from explicit single-mode ladder
// matrices and Kronecker products; independent of the strided kernels in the
// library. Layout matches index = level*M1*M2 + a*M2 + b.
std::vector<cx> dense_hamiltonian(const SimConfig& cfg, double tau) {
    const int m1 = cfg.window1.size(), m2 = cfg.window2.size();
    const int block = m1 * m2, dim = 2 * block;
    std::vector<cx> h(static_cast<size_t>(dim) * dim, cx(0.0, 0.0));
    const double env = std::exp(-tau * tau);
    auto add = [&](int row, int col, cx v) { h[static_cast<size_t>(row) * dim + col] += v; };
    // sigma^dag a_1 term: row (X, a-1, b), col (G, a, b), element sqrt(n1min + a)
    const cx c1 = cfg.g1 * env * std::polar(1.0, -cfg.delta1 * tau);
    for (int a = 1; a < m1; ++a)
        for (int b = 0; b < m2; ++b) {
            const double el = std::sqrt(static_cast<double>(cfg.window1.n_min + a));
            add(block + (a - 1) * m2 + b, a * m2 + b, c1 * el);
            add(a * m2 + b, block + (a - 1) * m2 + b, std::conj(c1) * el);
        }
    const cx c2 = cfg.g2 * env * std::polar(1.0, -cfg.delta2 * tau);
    for (int a = 0; a < m1; ++a)
        for (int b = 1; b < m2; ++b) {
            const double el = std::sqrt(static_cast<double>(cfg.window2.n_min + b));
            add(block + a * m2 + (b - 1), a * m2 + b, c2 * el);
            add(a * m2 + b, block + a * m2 + (b - 1), std::conj(c2) * el);
        }
    return h;
}

SimConfig strong_resonant_config() {
    // single resonant mode at strong coupling; all H(tau) commute, so the
    // reference propagator is quadrature-accurate even at few substeps
    SimConfig cfg;
    cfg.delta1 = 0.0;
    cfg.g1 = 8.0;
    cfg.g2 = 0.0;
    cfg.field1 = FockInit{25};
    cfg.field2 = FockInit{0};
    cfg.window1 = {15, 35};
    cfg.window2 = {0, 0};
    cfg.record_stride = 1000;
    return cfg;
}

}  // namespace

TEST_SUITE("dynamics") {

TEST_CASE("envelope values and symmetry") {
    CHECK(envelope(0.0) == 1.0);
    CHECK(envelope(3.0) == doctest::Approx(1.2341e-4).epsilon(1e-4));
    CHECK(envelope(3.0) <= 1.3e-4);
    CHECK(envelope(-3.0) == envelope(3.0));
    CHECK(envelope(-1.0) == doctest::Approx(std::exp(-1.0)).epsilon(1e-15));
}

TEST_CASE("config validation lists violations") {
    SimConfig cfg;
    cfg.field1 = FockInit{5};
    cfg.window1 = {0, 3};  // occupation outside window
    cfg.dt = 1.0;          // > span/10
    cfg.g1 = -1.0;
    try {
        validate(cfg);
        FAIL("expected ValidationError");
    } catch (const ValidationError& e) {
        const std::string msg = e.what();
        CHECK(msg.find("window1") != std::string::npos);
        CHECK(msg.find("dt") != std::string::npos);
        CHECK(msg.find("g1") != std::string::npos);
    }
}

TEST_CASE("rhs: zero coupling and dark vacuum give the zero vector") {
    SimConfig cfg;
    cfg.window1 = {0, 3};
    cfg.window2 = {0, 3};
    const ProductBasis basis = basis_of(cfg);

    SimConfig no_coupling = cfg;
    const StateVector any = random_state(basis, 17);
    const StateVector d1 = rhs(any, 0.4, no_coupling);
    CHECK(detail::norm_squared(d1.amplitudes) == 0.0);

    SimConfig coupled = cfg;
    coupled.g1 = coupled.g2 = 0.7;
    coupled.delta1 = -3.0;
    coupled.delta2 = 5.0;
    const StateVector vac = init_state(basis, EmitterLevel::Ground, FockInit{0}, FockInit{0});
    const StateVector d2 = rhs(vac, 0.0, coupled);
    CHECK(detail::norm_squared(d2.amplitudes) == 0.0);
}

TEST_CASE("rhs equals -i H psi against an independently assembled dense matrix") {
    SimConfig cfg;
    cfg.delta1 = -2.3;
    cfg.delta2 = 7.1;
    cfg.g1 = 0.6;
    cfg.g2 = 1.4;
    cfg.window1 = {0, 3};
    cfg.window2 = {0, 3};
    const ProductBasis basis = basis_of(cfg);
    const int dim = basis.dimension();
    for (double tau : {-1.2, 0.0, 0.9}) {
        const StateVector psi = random_state(basis, 42 + static_cast<unsigned>(10 * (tau + 2)));
        const StateVector got = rhs(psi, tau, cfg);
        const auto h = dense_hamiltonian(cfg, tau);
        for (int i = 0; i < dim; ++i) {
            cx hp(0.0, 0.0);
            for (int j = 0; j < dim; ++j)
                hp += h[static_cast<size_t>(i) * dim + j] * psi.amplitudes[j];
            const cx want = cx(0.0, -1.0) * hp;
            CHECK(std::abs(got.amplitudes[i] - want) < 1e-13);
        }
    }
}

TEST_CASE("rhs rejects a mismatched basis") {
    SimConfig cfg;
    cfg.window1 = {0, 3};
    cfg.window2 = {0, 3};
    const StateVector other = random_state(build_basis({0, 2}, {0, 3}), 1);
    CHECK_THROWS_AS(rhs(other, 0.0, cfg), BasisMismatch);
}

TEST_CASE("rk4_step with zero coupling is the identity") {
    SimConfig cfg;
    cfg.window1 = {0, 2};
    cfg.window2 = {0, 2};
    const StateVector psi = random_state(basis_of(cfg), 9);
    const StateVector out = rk4_step(psi, -1.0, 1e-3, cfg);
    for (size_t i = 0; i < psi.amplitudes.size(); ++i)
        CHECK(out.amplitudes[i] == psi.amplitudes[i]);
}

TEST_CASE("pre-normalization norm defect shrinks by >= 16x when dt is halved") {
    const SimConfig cfg = strong_resonant_config();
    const ProductBasis basis = basis_of(cfg);
    const StateVector psi = initial_state(cfg);
    auto norm_defect = [&](double dt) {
        // RK4 combination rebuilt from the public rhs, without renormalizing
        const StateVector k1 = rhs(psi, 0.0, cfg);
        StateVector stage = psi;
        for (size_t i = 0; i < stage.amplitudes.size(); ++i)
            stage.amplitudes[i] = psi.amplitudes[i] + 0.5 * dt * k1.amplitudes[i];
        const StateVector k2 = rhs(stage, 0.5 * dt, cfg);
        for (size_t i = 0; i < stage.amplitudes.size(); ++i)
            stage.amplitudes[i] = psi.amplitudes[i] + 0.5 * dt * k2.amplitudes[i];
        const StateVector k3 = rhs(stage, 0.5 * dt, cfg);
        for (size_t i = 0; i < stage.amplitudes.size(); ++i)
            stage.amplitudes[i] = psi.amplitudes[i] + dt * k3.amplitudes[i];
        const StateVector k4 = rhs(stage, dt, cfg);
        StateVector out = psi;
        for (size_t i = 0; i < out.amplitudes.size(); ++i)
            out.amplitudes[i] += dt / 6.0 *
                                 (k1.amplitudes[i] + 2.0 * k2.amplitudes[i] +
                                  2.0 * k3.amplitudes[i] + k4.amplitudes[i]);
        return std::abs(out.norm() - 1.0);
    };
    (void)basis;
    const double coarse = norm_defect(4e-3);
    const double fine = norm_defect(2e-3);
    CHECK(coarse > 1e-13);  // resolvable above double noise
    CHECK(coarse / fine >= 16.0);
}

TEST_CASE("one rk4 step matches one short reference step on a random 12-dim state") {
    SimConfig cfg;
    cfg.delta1 = -1.5;
    cfg.delta2 = 4.0;
    cfg.g1 = 0.9;
    cfg.g2 = 1.1;
    cfg.window1 = {0, 2};
    cfg.window2 = {0, 1};
    const ProductBasis basis = basis_of(cfg);
    REQUIRE(basis.dimension() == 12);
    const StateVector psi = random_state(basis, 2024);
    const StateVector stepped = rk4_step(psi, 0.2, 1e-3, cfg);
    const StateVector reference = oracle_step(psi, 0.2, 1e-3, cfg);
    CHECK(fidelity(stepped, reference) >= 1.0 - 1e-12);
}

TEST_CASE("evolve: zero coupling returns the initial state") {
    SimConfig cfg;
    cfg.field1 = FockInit{1};
    cfg.field2 = FockInit{0};
    cfg.window1 = {0, 2};
    cfg.window2 = {0, 2};
    const Trajectory traj = evolve(cfg);
    CHECK(fidelity(traj.final_state, initial_state(cfg)) >= 1.0 - 1e-12);
    CHECK(traj.audit.max_norm_drift_per_step <= 1e-15);
}

TEST_CASE("evolve: trajectory sampling covers [-span, +span]") {
    SimConfig cfg;
    cfg.g1 = 0.5;
    cfg.delta1 = -3.0;
    cfg.field1 = FockInit{1};
    cfg.window1 = {0, 3};
    cfg.window2 = {0, 1};
    cfg.dt = 1e-2;
    cfg.record_stride = 7;

    const Trajectory traj = evolve(cfg);
    const int steps = step_count(cfg);  // 600
    CHECK(steps == 600);
    // multiples of the stride plus the always-recorded final step
    const int expected = steps / cfg.record_stride + 1 + (steps % cfg.record_stride ? 1 : 0);
    CHECK(static_cast<int>(traj.times.size()) == expected);
    CHECK(traj.times.front() == -3.0);
    CHECK(traj.times.back() == 3.0);
    for (size_t i = 1; i < traj.times.size(); ++i) CHECK(traj.times[i] > traj.times[i - 1]);

    SUBCASE("row-count arithmetic when the stride divides the step count") {
        SimConfig even = cfg;
        even.record_stride = 100;
        const Trajectory t2 = evolve(even);
        CHECK(static_cast<int>(t2.times.size()) == steps / 100 + 1);
    }
}

TEST_CASE("evolve: resonant pulse area reproduces sin^2(G sqrt(pi n))") {
    SimConfig cfg;
    cfg.delta1 = 0.0;
    cfg.g1 = 0.1;
    cfg.g2 = 0.0;
    cfg.field1 = FockInit{100};
    cfg.field2 = FockInit{0};
    cfg.window1 = {80, 120};
    cfg.window2 = {0, 1};
    const Trajectory traj = evolve(cfg);
    const double expected = std::pow(std::sin(0.1 * std::sqrt(100.0 * M_PI)), 2);
    CHECK(traj.observables.back().p_x == doctest::Approx(expected).epsilon(1e-3));
    CHECK(expected == doctest::Approx(0.9598).epsilon(1e-3));
}

TEST_CASE("evolve: full inversion of the |G,5,0> vacuum swing-up") {
    SimConfig cfg;
    cfg.delta1 = -7.56;
    cfg.delta2 = -28.56;
    cfg.g1 = cfg.g2 = 5.0;
    cfg.field1 = FockInit{5};
    cfg.field2 = FockInit{0};
    cfg.window1 = {0, 8};
    cfg.window2 = {0, 8};
    const Trajectory traj = evolve(cfg);
    CHECK(traj.observables.back().p_x == doctest::Approx(1.00).epsilon(0.01));
}

TEST_CASE("evolve: record_states keeps one snapshot per sample") {
    SimConfig cfg;
    cfg.g1 = 1.0;
    cfg.delta1 = -2.0;
    cfg.field1 = FockInit{1};
    cfg.window1 = {0, 3};
    cfg.window2 = {0, 1};
    cfg.dt = 0.05;
    cfg.record_stride = 30;
    EvolveOptions opts;
    opts.record_states = true;
    const Trajectory traj = evolve(cfg, opts);
    CHECK(traj.snapshots.size() == traj.times.size());
    CHECK(exciton_population(traj.snapshots.back()) ==
          doctest::Approx(traj.observables.back().p_x).epsilon(1e-12));
}

TEST_CASE("excitation number is conserved along converged runs") {
    SimConfig cfg;
    cfg.delta1 = -4.06;
    cfg.delta2 = -15.96;
    cfg.g1 = cfg.g2 = 5.0;
    cfg.field1 = FockInit{2};
    cfg.field2 = FockInit{0};
    cfg.window1 = {0, 5};
    cfg.window2 = {0, 5};
    const Trajectory traj = evolve(cfg);
    for (const auto& obs : traj.observables)
        CHECK(std::abs(obs.excitation - traj.observables.front().excitation) < 1e-6);

    SimConfig coh = cfg;
    coh.field1 = CoherentInit{cx(1.0, 0.0), 1e-8};
    coh.window1 = {0, 12};
    coh.window2 = {0, 12};
    const Trajectory tc = evolve(coh);
    for (const auto& obs : tc.observables)
        CHECK(std::abs(obs.excitation - tc.observables.front().excitation) < 1e-6);
}

TEST_CASE("Fock product states stay inside their excitation block") {
    SimConfig cfg;
    cfg.delta1 = -4.06;
    cfg.delta2 = -15.96;
    cfg.g1 = cfg.g2 = 5.0;
    cfg.field1 = FockInit{2};
    cfg.field2 = FockInit{0};
    cfg.window1 = {0, 5};
    cfg.window2 = {0, 5};
    const Trajectory traj = evolve(cfg);
    const ProductBasis& basis = traj.final_state.basis;
    for (int i = 0; i < basis.dimension(); ++i) {
        const auto lab = basis.label(i);
        const int excitation = static_cast<int>(lab.level) + lab.n1 + lab.n2;
        if (excitation != 2) CHECK(std::abs(traj.final_state.amplitudes[i]) < 1e-10);
    }
}

TEST_CASE("flipping the sign of both detunings leaves observables invariant") {
    SimConfig cfg;
    cfg.delta1 = -4.06;
    cfg.delta2 = -15.96;
    cfg.g1 = cfg.g2 = 5.0;
    cfg.field1 = FockInit{2};
    cfg.field2 = FockInit{1};
    cfg.window1 = {0, 5};
    cfg.window2 = {0, 5};
    SimConfig flipped = cfg;
    flipped.delta1 = -cfg.delta1;
    flipped.delta2 = -cfg.delta2;
    const Trajectory a = evolve(cfg);
    const Trajectory b = evolve(flipped);
    REQUIRE(a.observables.size() == b.observables.size());
    for (size_t i = 0; i < a.observables.size(); ++i) {
        CHECK(std::abs(a.observables[i].p_x - b.observables[i].p_x) < 1e-9);
        CHECK(std::abs(a.observables[i].n1_mean - b.observables[i].n1_mean) < 1e-9);
        CHECK(std::abs(a.observables[i].n2_mean - b.observables[i].n2_mean) < 1e-9);
    }
}

TEST_CASE("relabeling the modes swaps the photon-number trajectories exactly") {
    SimConfig cfg;
    cfg.delta1 = -4.06;
    cfg.delta2 = -15.96;
    cfg.g1 = 5.0;
    cfg.g2 = 4.0;
    cfg.field1 = FockInit{2};
    cfg.field2 = FockInit{1};
    cfg.window1 = {0, 5};
    cfg.window2 = {0, 4};
    SimConfig swapped;
    swapped.delta1 = cfg.delta2;
    swapped.delta2 = cfg.delta1;
    swapped.g1 = cfg.g2;
    swapped.g2 = cfg.g1;
    swapped.field1 = cfg.field2;
    swapped.field2 = cfg.field1;
    swapped.window1 = cfg.window2;
    swapped.window2 = cfg.window1;
    const Trajectory a = evolve(cfg);
    const Trajectory b = evolve(swapped);
    REQUIRE(a.observables.size() == b.observables.size());
    for (size_t i = 0; i < a.observables.size(); ++i) {
        CHECK(a.observables[i].n1_mean == b.observables[i].n2_mean);  // bit-exact
        CHECK(a.observables[i].n2_mean == b.observables[i].n1_mean);
    }
}

TEST_CASE("reference propagator: identity at zero coupling, analytic Rabi limit") {
    SimConfig cfg;
    cfg.field1 = FockInit{1};
    cfg.window1 = {0, 2};
    cfg.window2 = {0, 1};
    cfg.dt = 0.05;
    const StateVector fin = oracle_propagate(cfg, 1);
    CHECK(fidelity(fin, initial_state(cfg)) >= 1.0 - 1e-12);

    SimConfig rabi;
    rabi.delta1 = 0.0;
    rabi.g1 = 0.1;
    rabi.g2 = 0.0;
    rabi.field1 = FockInit{25};
    rabi.field2 = FockInit{0};
    rabi.window1 = {15, 35};
    rabi.window2 = {0, 0};
    const double expected = std::pow(std::sin(0.1 * std::sqrt(25.0 * M_PI)), 2);
    const StateVector end = oracle_propagate(rabi, 1);
    CHECK(exciton_population(end) == doctest::Approx(expected).epsilon(1e-4));
    // unitary by construction: only rounding accumulates, never dt-powers
    CHECK(std::abs(end.norm() - 1.0) < 1e-11);
}

TEST_CASE("reference propagator refuses oversized bases") {
    SimConfig cfg;
    cfg.field1 = FockInit{0};
    cfg.window1 = {0, 40};
    cfg.window2 = {0, 40};
    CHECK_THROWS_AS(oracle_propagate(cfg, 1), DimensionTooLarge);
}

TEST_CASE("rk4 error against the reference shrinks ~16x per dt halving") {
    const SimConfig base = strong_resonant_config();
    const StateVector ref = oracle_propagate(base, 32);
    auto dist = [&](double dt) {
        SimConfig c = base;
        c.dt = dt;
        return std::sqrt(std::max(0.0, 1.0 - fidelity(evolve(c).final_state, ref)));
    };
    const double e_coarse = dist(2e-3);
    const double e_fine = dist(1e-3);
    CHECK(e_fine > 1e-9);  // above the fidelity resolution floor
    const double ratio = e_coarse / e_fine;
    CHECK(ratio > 11.0);
    CHECK(ratio < 22.0);
}

TEST_CASE("convergence audit: Rabi window placement") {
    SimConfig cfg;
    cfg.delta1 = 0.0;
    cfg.g1 = 0.1;
    cfg.g2 = 0.0;
    cfg.field1 = FockInit{100};
    cfg.field2 = FockInit{0};
    cfg.window1 = {80, 120};
    cfg.window2 = {0, 1};

    SUBCASE("a roomy window passes") {
        const AuditResult r = convergence_audit(evolve(cfg), {1e-8, 1e-6, 1e-6});
        CHECK(r.pass);
        CHECK(r.saturated_edges.empty());
    }

    SUBCASE("a two-state window saturates its edges") {
        SimConfig tight = cfg;
        tight.window1 = {99, 100};
        const Trajectory traj = evolve(tight);
        const AuditResult r = convergence_audit(traj, {1e-8, 1e-6, 1e-6});
        CHECK_FALSE(r.pass);
        CHECK(traj.audit.max_boundary_occupancy == doctest::Approx(1.0).epsilon(1e-6));
        CHECK_FALSE(r.saturated_edges.empty());
        CHECK(r.summary().find("FAIL") != std::string::npos);
    }
}

TEST_CASE("step-halving self-check reports a near-unity fidelity") {
    SimConfig cfg;
    cfg.delta1 = -4.06;
    cfg.delta2 = -15.96;
    cfg.g1 = cfg.g2 = 5.0;
    cfg.field1 = FockInit{2};
    cfg.field2 = FockInit{0};
    cfg.window1 = {0, 5};
    cfg.window2 = {0, 5};
    EvolveOptions opts;
    opts.step_halving_check = true;
    const Trajectory traj = evolve(cfg, opts);
    REQUIRE(traj.audit.step_halving_fidelity.has_value());
    CHECK(*traj.audit.step_halving_fidelity >= 1.0 - 1e-10);
}

}  // TEST_SUITE
