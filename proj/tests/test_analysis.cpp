#include <random>

#include "doctest.h"
#include "oracle.hpp"
#include "presets.hpp"
#include "rydgrover/analysis.hpp"
#include "rydgrover/mcwf.hpp"
#include "rydgrover/mesolve.hpp"

using namespace rydgrover;
using namespace rydgrover::analysis;
using hilbert::Bitstring;
using hilbert::Layout;
using hilbert::Level;
using hilbert::Scheme;

namespace {

hilbert::StateVector basis_state(const Layout& layout, std::vector<Level> levels, bool ancilla_r = false) {
    Vector v = Vector::Zero(static_cast<Eigen::Index>(layout.dim()));
    std::optional<hilbert::AncillaLevel> anc;
    if (layout.ancilla) anc = ancilla_r ? hilbert::AncillaLevel::R : hilbert::AncillaLevel::g;
    v(static_cast<Eigen::Index>(hilbert::basis_index(levels, anc, layout))) = 1.0;
    return {layout, v};
}

mcwf::TrajectoryResult fake_result(const hilbert::StateVector& s, std::uint64_t id, std::size_t markers = 1) {
    return {s, std::vector<hilbert::StateVector>(markers, s), {}, 99, id};
}

std::string bits(std::size_t x, std::size_t k) {
    std::string s(k, '0');
    for (std::size_t j = 0; j < k; ++j) s[k - 1 - j] = ((x >> j) & 1U) ? '1' : '0';
    return s;
}

}  // namespace

TEST_CASE("success probability examples") {
    const Layout two{2, false};
    const auto m01 = Bitstring::parse("01");
    CHECK(success_probability(basis_state(two, {Level::q0, Level::q1}), m01) == 1.0);
    CHECK(success_probability(basis_state(two, {Level::q0, Level::lost}), m01) == 1.0);
    CHECK(success_probability(basis_state(two, {Level::q0, Level::ryd}), m01) == 0.0);
    CHECK(success_probability(basis_state(two, {Level::q0, Level::ryd}), m01, {true}) == 1.0);
    CHECK(success_probability(basis_state(two, {Level::q1, Level::q1}), m01) == 0.0);

    Vector u = Vector::Zero(16);
    for (const char* b : {"00", "01", "10", "11"}) u(oracle::qubit_index(b, false)) = 0.5;
    CHECK(success_probability(hilbert::StateVector(two, u), m01) == doctest::Approx(1.0 / 4));

    const Layout anc{2, true};
    CHECK(success_probability(basis_state(anc, {Level::q0, Level::q1}, true), m01) == 1.0);
    CHECK_THROWS(success_probability(basis_state(two, {Level::q0, Level::q1}), Bitstring::parse("010")));

    const auto rho = mesolve::DensityMatrix::from_state(basis_state(anc, {Level::q0, Level::lost}));
    CHECK(success_probability(rho, m01) == doctest::Approx(1.0));
}

TEST_CASE("success probabilities of all patterns sum to one without Rydberg population") {
    std::mt19937_64 gen(8);
    std::normal_distribution<double> n;
    for (std::size_t k = 1; k <= 3; ++k) {
        for (bool anc : {false, true}) {
            const Layout layout{k, anc};
            Vector v = Vector::Zero(static_cast<Eigen::Index>(layout.dim()));
            for (std::size_t i = 0; i < layout.dim(); ++i) {
                bool has_ryd = false;
                for (std::size_t j = 0; j < k; ++j) has_ryd = has_ryd || hilbert::digit(i, j, layout) == 2;
                if (!has_ryd) v(static_cast<Eigen::Index>(i)) = Complex(n(gen), n(gen));
            }
            const hilbert::StateVector s(layout, v.normalized());
            double total = 0.0;
            for (std::size_t m = 0; m < (std::size_t{1} << k); ++m) total += success_probability(s, Bitstring::parse(bits(m, k)));
            CHECK(total == doctest::Approx(1.0).epsilon(1e-9));
        }
    }
}

TEST_CASE("level populations") {
    const auto cfg = fixtures::preset_config("ideal", "01", Scheme::AncillaBlockade);
    const auto reg = config::resolve(cfg).reg;
    const auto probs = basis_probabilities(hilbert::initial_state(reg));
    for (std::size_t atom = 0; atom < 2; ++atom) {
        CHECK(level_population(probs, reg.layout(), atom, 0) == 1.0);
        CHECK(level_population(probs, reg.layout(), atom, 2) == 0.0);
    }
    CHECK(level_population(probs, reg.layout(), 2, 0) == 1.0);
    CHECK_THROWS(level_population(probs, reg.layout(), 2, 2));

    std::vector<PopulationPoint> pts{{0.0, probs}, {1.0, probs}};
    CHECK(population_trace(pts, reg.layout(), 1, 0) == std::vector<double>{1.0, 1.0});

    // After preparation: half in each qubit level.
    const auto resolved = config::resolve(cfg);
    const auto model = resolved.build_model();
    mcwf::PropagatorCache cache(model);
    const auto prep = schedule::compile_preparation(resolved.reg, resolved.pulses);
    mcwf::TrajectoryState st(hilbert::initial_state(resolved.reg), RngStream(1, 0));
    for (const auto& s : prep) mcwf::evolve_segment(st, s, cache);
    const auto after = basis_probabilities(st.psi);
    for (std::size_t atom = 0; atom < 2; ++atom) {
        CHECK(level_population(after, reg.layout(), atom, 0) == doctest::Approx(0.5).epsilon(1e-9));
        CHECK(level_population(after, reg.layout(), atom, 1) == doctest::Approx(0.5).epsilon(1e-9));
        double sum = 0.0;
        for (std::size_t l = 0; l < 4; ++l) sum += level_population(after, reg.layout(), atom, l);
        CHECK(sum == doctest::Approx(1.0).epsilon(1e-9));
    }
}

TEST_CASE("aggregation") {
    const Layout two{2, false};
    const auto m01 = Bitstring::parse("01");
    SUBCASE("identical marked states") {
        std::vector<mcwf::TrajectoryResult> rs;
        for (std::uint64_t i = 0; i < 50; ++i) rs.push_back(fake_result(basis_state(two, {Level::q0, Level::q1}), i, 2));
        for (Estimator e : {Estimator::expectation, Estimator::sampling}) {
            const auto st = aggregate(rs, m01, {}, e);
            REQUIRE(st.iterations.size() == 2);
            CHECK(st.iterations[1].iteration == 2);
            CHECK(st.iterations[0].p == 1.0);
            CHECK(st.iterations[0].std_err == 0.0);
            CHECK(st.iterations[0].n == 50);
            CHECK(st.iterations[0].histogram.at("01") == 50);
        }
    }
    SUBCASE("binomial error in sampling mode") {
        Vector v = Vector::Zero(16);
        v(oracle::qubit_index("01", false)) = std::sqrt(0.8);
        v(oracle::qubit_index("00", false)) = std::sqrt(0.2);
        std::vector<mcwf::TrajectoryResult> rs;
        for (std::uint64_t i = 0; i < 200; ++i) rs.push_back(fake_result(hilbert::StateVector(two, v), i));
        const auto exp = aggregate(rs, m01);
        CHECK(exp.iterations[0].p == doctest::Approx(0.8).epsilon(1e-12));
        CHECK(exp.iterations[0].std_err < 1e-9);
        const auto smp = aggregate(rs, m01, {}, Estimator::sampling);
        const auto& it = smp.iterations[0];
        CHECK(it.std_err == doctest::Approx(std::sqrt(it.p * (1 - it.p) / 200)).epsilon(1e-12));
        CHECK(it.std_err == doctest::Approx(0.028).epsilon(0.15));
        CHECK(std::abs(it.p - 0.8) < 4 * 0.028);
        CHECK(it.histogram.at("01") + it.histogram.at("00") == 200);
    }
    SUBCASE("atoms left in r read out as x") {
        std::vector<mcwf::TrajectoryResult> rs{fake_result(basis_state(two, {Level::ryd, Level::q1}), 0)};
        CHECK(aggregate(rs, m01).iterations[0].histogram.begin()->first == "x1");
        CHECK(aggregate(rs, m01, {true}).iterations[0].histogram.begin()->first == "11");
    }
    CHECK_THROWS(aggregate(std::vector<mcwf::TrajectoryResult>{}, m01));
}

TEST_CASE("majority vote") {
    const std::vector<std::string> a{"01", "01", "11"};
    CHECK(majority_vote(a).winner == "01");
    CHECK_FALSE(majority_vote(a).tie);
    const std::vector<std::string> b{"11", "01"};
    CHECK(majority_vote(b).winner == "01");
    CHECK(majority_vote(b).tie);
    CHECK_THROWS(majority_vote(std::vector<std::string>{}));

    // 200 readouts, 60% marked and the rest spread evenly over the others.
    std::mt19937_64 gen(12);
    std::discrete_distribution<int> pick({0.4 / 3, 0.6, 0.4 / 3, 0.4 / 3});
    const char* names[] = {"00", "01", "10", "11"};
    int wrong = 0;
    const int trials = 3000;
    for (int t = 0; t < trials; ++t) {
        std::vector<std::string> s;
        for (int i = 0; i < 200; ++i) s.emplace_back(names[pick(gen)]);
        if (majority_vote(s).winner != "01") ++wrong;
    }
    CHECK(wrong <= 3);
}

TEST_CASE("expectation and sampling agree on a dissipative ensemble") {
    auto cfg = fixtures::preset_config("b1", "01", Scheme::DirectBlockade);
    const auto resolved = config::resolve(cfg);
    const auto model = resolved.build_model();
    const auto sched = resolved.build_schedule(1);
    mcwf::PropagatorCache cache(model);
    const auto rs = mcwf::run_ensemble(sched, cache, 4242, 2000, 4);
    const auto e = aggregate(rs, resolved.reg.marked, {}, Estimator::expectation).iterations[0];
    const auto s = aggregate(rs, resolved.reg.marked, {}, Estimator::sampling).iterations[0];
    CAPTURE(e.p);
    CAPTURE(s.p);
    CHECK(std::abs(e.p - s.p) <= 3.0 * std::hypot(e.std_err, s.std_err));
}

TEST_CASE("blockade lets one atom at a time reach r") {
    // Direct blockade at V = 50 w (ideal-rate limit), register starting in |11>.
    auto cfg = fixtures::preset_config("ideal", "01", Scheme::DirectBlockade);
    cfg.physics.v_aa_mhz_over_2pi = 50.0 * cfg.physics.omega_l_mhz_over_2pi / std::sqrt(2.0);
    const auto resolved = config::resolve(cfg);
    const auto model = resolved.build_model();
    mcwf::PropagatorCache cache(model);
    const auto block = schedule::compile_rydberg_block(resolved.reg, resolved.pulses);
    mcwf::TrajectoryState st(basis_state(resolved.reg.layout(), {Level::q1, Level::q1}), RngStream(1, 0));
    double max_r0 = 0.0, max_r1 = 0.0;
    for (const auto& seg : block) {
        mcwf::evolve_segment(st, seg, cache, [&](double, const Vector& psi, const schedule::PulseSegment&) {
            const Eigen::VectorXd p = psi.cwiseAbs2();
            max_r0 = std::max(max_r0, level_population(p, resolved.reg.layout(), 0, 2));
            max_r1 = std::max(max_r1, level_population(p, resolved.reg.layout(), 1, 2));
        });
    }
    CHECK(max_r0 > 0.99);
    CHECK(max_r1 < 0.05);
    // The block returns |11> to itself up to a sign.
    CHECK(std::norm(st.psi.amplitudes()(oracle::qubit_index("11", false))) == doctest::Approx(1.0).epsilon(1e-3));
}

TEST_CASE("after losing an atom the remaining register still runs Grover") {
    // k = 3, marked 010, ideal limit. After iteration 1 atom 2 is read in
    // `branch` and moved to |o>; the later iterations must act on atoms 0
    // and 1 as two-qubit oracle (marked 01) plus inversion about the mean.
    auto cfg = fixtures::preset_config("ideal", "010", Scheme::DirectBlockade);
    const auto resolved = config::resolve(cfg);
    const auto sched = resolved.build_schedule(3);
    const auto layout = resolved.reg.layout();
    auto pair_index = [](int x, int third) { return ((x >> 1) * 16) + ((x & 1) * 4) + third; };

    for (int branch : {0, 1}) {
        auto st = hilbert::initial_state(resolved.reg);
        std::vector<Eigen::Vector4cd> remaining;
        std::size_t marker = 0;
        for (const auto& seg : sched.segments) {
            if (!seg.is_marker()) {
                schedule::apply_ideal(seg, resolved.reg, st);
                continue;
            }
            Vector& a = st.amplitudes();
            if (++marker == 1) {
                Vector next = Vector::Zero(a.size());
                for (int x = 0; x < 4; ++x) next(pair_index(x, 3)) = a(pair_index(x, branch));
                a = next.normalized();
            }
            Eigen::Vector4cd r;
            for (int x = 0; x < 4; ++x) r(x) = a(pair_index(x, 3));
            remaining.push_back(r);
        }
        REQUIRE(remaining.size() == 3);
        CHECK(st.norm() == doctest::Approx(1.0).epsilon(1e-12));
        for (std::size_t i = 0; i < layout.dim(); ++i)
            if (hilbert::digit(i, 2, layout) != 3) CHECK(std::abs(st.amplitudes()(static_cast<Eigen::Index>(i))) < 1e-12);

        std::vector<double> conditional;
        for (const auto& r : remaining) conditional.push_back(std::norm(r(1)) / r.squaredNorm());
        for (std::size_t m = 1; m < 3; ++m) {
            Eigen::Vector4cd ref = remaining[m - 1];
            ref(1) = -ref(1);
            ref = (2.0 * ref.mean() - ref.array()).matrix();
            const Complex phase = remaining[m].dot(ref);  // <ref|next>^*, unit modulus if equal up to phase
            CHECK(std::abs(phase) == doctest::Approx(1.0).epsilon(1e-9));
        }
        if (branch == 1) {
            // Atom 2 read the wrong digit, so the pair was left uniform and
            // one more iteration finds 01.
            CHECK(conditional[0] == doctest::Approx(0.25).epsilon(1e-9));
            CHECK(conditional[1] == doctest::Approx(1.0).epsilon(1e-9));
        }
    }
}
