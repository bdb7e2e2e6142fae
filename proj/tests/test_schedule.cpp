#include <random>

#include "doctest.h"
#include "oracle.hpp"
#include "rydgrover/schedule.hpp"

using namespace rydgrover;
using namespace rydgrover::schedule;
using hilbert::Bitstring;
using hilbert::RegisterConfig;
using hilbert::Scheme;

namespace {

PulseParams published() {
    PulseParams p;
    p.omega_mw = kTwoPi * 2e4;
    p.delta_mw = 25.0 * p.omega_mw;
    p.omega_l = kTwoPi * 5e5;
    p.gap = 50e-9;
    return p;
}

RegisterConfig reg(const std::string& marked, Scheme s = Scheme::DirectBlockade) {
    return {marked.size(), s, Bitstring::parse(marked)};
}

std::string bits(std::size_t x, std::size_t k) {
    std::string s(k, '0');
    for (std::size_t j = 0; j < k; ++j) s[k - 1 - j] = ((x >> j) & 1U) ? '1' : '0';
    return s;
}

// Ideal-limit action of a segment list restricted to the 2^k qubit states
// (ancilla in g). Returns the 2^k x 2^k matrix and the largest leakage
// outside the subspace.
std::pair<Matrix, double> qubit_action(const std::vector<PulseSegment>& segs, const RegisterConfig& config) {
    const std::size_t n = std::size_t{1} << config.k;
    const bool anc = config.has_ancilla();
    Matrix u(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
    double leak = 0.0;
    for (std::size_t c = 0; c < n; ++c) {
        Vector v = Vector::Zero(static_cast<Eigen::Index>(config.dim()));
        v(oracle::qubit_index(bits(c, config.k), anc)) = 1.0;
        hilbert::StateVector st(config.layout(), v);
        for (const auto& s : segs) apply_ideal(s, config, st);
        double inside = 0.0;
        for (std::size_t r = 0; r < n; ++r) {
            const Complex a = st.amplitudes()(oracle::qubit_index(bits(r, config.k), anc));
            u(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = a;
            inside += std::norm(a);
        }
        leak = std::max(leak, 1.0 - inside);
    }
    return {u, leak};
}

// max |a - e^{i chi} b| with chi fixed by the largest entry of b.
double distance_up_to_phase(const Matrix& a, const Matrix& b) {
    Eigen::Index r = 0, c = 0;
    b.cwiseAbs().maxCoeff(&r, &c);
    const Complex phase = a(r, c) / b(r, c);
    if (std::abs(std::abs(phase) - 1.0) > 1e-9) return 1.0;
    return oracle::max_abs(a - phase * b);
}

}  // namespace

TEST_CASE("ideal single-qubit gate") {
    const Eigen::Vector2cd zero(1.0, 0.0);
    const Eigen::Vector2cd x = ideal_gate(0.0, kPi) * zero;
    CHECK(std::abs(x(0)) < 1e-15);
    CHECK(std::abs(x(1) - kI) < 1e-15);

    const Eigen::Matrix2cd z = ideal_gate(kPi / 2, kPi) * ideal_gate(0.0, kPi);
    Eigen::Matrix2cd iz;
    iz << kI, 0, 0, -kI;
    CHECK((z - iz).cwiseAbs().maxCoeff() < 1e-15);

    const Eigen::Vector2cd plus = ideal_gate(-kPi / 2, kPi / 2) * zero;
    CHECK(std::abs(plus(0) - 1.0 / std::sqrt(2.0)) < 1e-15);
    CHECK(std::abs(plus(1) - 1.0 / std::sqrt(2.0)) < 1e-15);

    std::mt19937_64 gen(5);
    std::uniform_real_distribution<double> u(-4.0, 4.0);
    for (int i = 0; i < 50; ++i) {
        const Eigen::Matrix2cd g = ideal_gate(u(gen), u(gen));
        CHECK((g.adjoint() * g - Eigen::Matrix2cd::Identity()).cwiseAbs().maxCoeff() < 1e-14);
    }
}

TEST_CASE("preparation block") {
    const auto p = published();
    const auto segs = compile_preparation(reg("01"), p);
    REQUIRE(segs.size() == 2);
    CHECK(segs[0].duration == doctest::Approx(12.5e-6).epsilon(1e-12));
    CHECK(segs[0].drive.mw_phase == doctest::Approx(-kPi / 2));
    CHECK(segs[1].label.kind == SegmentKind::idle);
    CHECK(segs[1].duration == doctest::Approx(50e-9));

    auto st = hilbert::initial_state(reg("01"));
    for (const auto& s : segs) apply_ideal(s, reg("01"), st);
    for (const char* b : {"00", "01", "10", "11"})
        CHECK(std::abs(st.amplitudes()(oracle::qubit_index(b, false)) - 0.5) < 1e-15);
}

TEST_CASE("oracle block") {
    const auto p = published();
    SUBCASE("Stark detuning follows the marked digits") {
        const auto segs = compile_oracle(reg("01"), p);
        CHECK(segs.front().label.kind == SegmentKind::oracle_x_pre);
        CHECK(segs.front().drive.mw_detuning[0] == doctest::Approx(p.delta_mw));
        CHECK(segs.front().drive.mw_detuning[1] == 0.0);
        CHECK(segs.front().duration == doctest::Approx(25e-6));
        const auto both = compile_oracle(reg("11"), p);
        CHECK(both.front().drive.mw_detuning == std::vector<double>{0.0, 0.0});
    }
    SUBCASE("ideal action flips every unmarked amplitude") {
        for (Scheme s : {Scheme::DirectBlockade, Scheme::AncillaBlockade}) {
            for (std::size_t k = 2; k <= 3; ++k) {
                for (std::size_t m = 0; m < (std::size_t{1} << k); ++m) {
                    const auto config = reg(bits(m, k), s);
                    const auto [u, leak] = qubit_action(compile_oracle(config, p), config);
                    CHECK(leak < 1e-12);
                    Matrix expect = -Matrix::Identity(u.rows(), u.cols());
                    expect(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(m)) = 1.0;
                    CHECK(distance_up_to_phase(u, expect) < 1e-12);
                }
            }
        }
    }
}

TEST_CASE("Rydberg block") {
    const auto p = published();
    SUBCASE("direct scheme timing") {
        const auto segs = compile_rydberg_block(reg("01"), p);
        std::size_t lasers = 0;
        for (const auto& s : segs) {
            if (s.drive.laser_active()) {
                ++lasers;
                CHECK(s.duration == doctest::Approx(1e-6).epsilon(1e-12));
            } else {
                CHECK(s.label.kind == SegmentKind::idle);
            }
        }
        CHECK(lasers == 4);
        CHECK(segs.size() == 7);
        const int order[] = {0, 1, 1, 0};
        for (std::size_t i = 0; i < 4; ++i) CHECK(segs[2 * i].label.index == order[i]);
    }
    SUBCASE("ancilla scheme timing") {
        const auto segs = compile_rydberg_block(reg("01", Scheme::AncillaBlockade), p);
        REQUIRE(segs.size() == 5);
        CHECK(segs[0].duration == doctest::Approx(1e-6).epsilon(1e-12));
        CHECK(segs[2].duration == doctest::Approx(2e-6).epsilon(1e-12));
        CHECK(segs[4].duration == doctest::Approx(1e-6).epsilon(1e-12));
        CHECK(segs[4].drive.laser_phase[0] == doctest::Approx(kPi));
    }
    SUBCASE("ideal phase patterns agree up to a global sign") {
        for (std::size_t k = 2; k <= 3; ++k) {
            const auto direct = reg(std::string(k, '0'));
            const auto anc = reg(std::string(k, '0'), Scheme::AncillaBlockade);
            const auto [ua, la] = qubit_action(compile_rydberg_block(direct, p), direct);
            const auto [ub, lb] = qubit_action(compile_rydberg_block(anc, p), anc);
            CHECK(la < 1e-12);
            CHECK(lb < 1e-12);
            const auto n = ua.rows();
            Matrix flip_nonzero = -Matrix::Identity(n, n);
            flip_nonzero(0, 0) = 1.0;
            CHECK(oracle::max_abs(ua - flip_nonzero) < 1e-12);
            Matrix flip_zero = Matrix::Identity(n, n);
            flip_zero(0, 0) = -1.0;
            CHECK(oracle::max_abs(ub - flip_zero) < 1e-12);
        }
    }
}

TEST_CASE("Grover block is the inversion about the mean") {
    const auto p = published();
    for (Scheme s : {Scheme::DirectBlockade, Scheme::AncillaBlockade}) {
        for (std::size_t k = 2; k <= 4; ++k) {
            const auto config = reg(std::string(k, '1'), s);
            const auto [u, leak] = qubit_action(compile_grover(config, p), config);
            CHECK(leak < 1e-12);
            const auto n = u.rows();
            const Vector sv = Vector::Constant(n, 1.0 / std::sqrt(static_cast<double>(n)));
            const Matrix expect = 2.0 * sv * sv.adjoint() - Matrix::Identity(n, n);
            CHECK(distance_up_to_phase(u, expect) < 1e-12);
        }
    }
}

TEST_CASE("full algorithm against textbook Grover") {
    const auto p = published();
    for (Scheme s : {Scheme::DirectBlockade, Scheme::AncillaBlockade}) {
        for (std::size_t k = 2; k <= 4; ++k) {
            for (std::size_t m : {std::size_t{0}, (std::size_t{1} << k) - 1, std::size_t{1}}) {
                const std::string marked = bits(m, k);
                const auto config = reg(marked, s);
                const auto sched = compile_algorithm(config, p, 5);
                const auto snaps = ideal_snapshots(sched);
                REQUIRE(snaps.size() == 5);
                for (std::size_t it = 1; it <= 5; ++it) {
                    const double got =
                        std::norm(snaps[it - 1].amplitudes()(oracle::qubit_index(marked, config.has_ancilla())));
                    CHECK(got == doctest::Approx(oracle::grover_simulated(k, m, it)).epsilon(1e-9));
                    CHECK(got == doctest::Approx(oracle::grover_success(k, it)).epsilon(1e-9));
                }
            }
        }
    }
    const auto config = reg("01");
    const auto one = ideal_snapshots(compile_algorithm(config, p, 1));
    CHECK(std::norm(one[0].amplitudes()(oracle::qubit_index("01", false))) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("algorithm layout and durations") {
    const auto p = published();
    const auto config = reg("01");
    const auto sched = compile_algorithm(config, p, 1);
    double mw = 0.0, laser = 0.0, idle = 0.0;
    std::size_t idles = 0;
    for (const auto& s : sched.segments) {
        if (s.drive.microwave_active()) mw += s.duration;
        else if (s.drive.laser_active()) laser += s.duration;
        else if (!s.is_marker()) {
            idle += s.duration;
            ++idles;
        }
        if (s.drive.microwave_active()) CHECK(s.duration * s.drive.mw_amp == doctest::Approx(s.duration > 20e-6 ? kPi : kPi / 2).epsilon(1e-14));
    }
    CHECK(mw == doctest::Approx(87.5e-6).epsilon(1e-12));
    CHECK(laser == doctest::Approx(8e-6).epsilon(1e-12));
    CHECK(idle == doctest::Approx(static_cast<double>(idles) * 50e-9).epsilon(1e-12));
    CHECK(sched.total_duration() == doctest::Approx(mw + laser + idle).epsilon(1e-12));
    CHECK(sched.marker_count() == 1);
    CHECK(compile_algorithm(config, p, 4).marker_count() == 4);
    CHECK_THROWS_AS(compile_algorithm(config, p, 0), std::invalid_argument);
    CHECK_NOTHROW(lint(sched));
}

TEST_CASE("lint rejects malformed schedules") {
    const auto p = published();
    const auto config = reg("01");
    auto broken = compile_algorithm(config, p, 2);
    broken.segments[0].duration *= 1.01;
    CHECK_THROWS_AS(lint(broken), std::logic_error);

    broken = compile_algorithm(config, p, 2);
    broken.segments[1].drive.laser_amp[0] = p.omega_l;
    CHECK_THROWS_AS(lint(broken), std::logic_error);

    broken = compile_algorithm(config, p, 2);
    broken.iterations = 3;
    CHECK_THROWS_AS(lint(broken), std::logic_error);
}

TEST_CASE("schedule table") {
    const auto sched = compile_algorithm(reg("01", Scheme::AncillaBlockade), published(), 1);
    const auto table = dump_table(sched);
    CHECK(table.rfind("start_time_s,duration_s,label,mw_amp,mw_phase,det_0,det_1", 0) == 0);
    CHECK(table.find("anc_laser_amp") != std::string::npos);
    CHECK(table.find("ancilla_2pi") != std::string::npos);
    CHECK(std::count(table.begin(), table.end(), '\n') == static_cast<long>(sched.segments.size() + 1));
}
