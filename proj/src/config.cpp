#include "rydgrover/config.hpp"

#include <array>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "json.hpp"

#include "rydgrover/errors.hpp"
#include "rydgrover/linalg.hpp"

namespace rydgrover::config {

using nlohmann::json;

namespace {

model::RelaxationRates family_rates(double gamma_r, double deph_r) {
    model::RelaxationRates r;
    r.gamma0 = 2.0;
    r.gamma1 = 2.0;
    r.gamma_r0 = gamma_r / 16.0;
    r.gamma_r1 = gamma_r / 16.0;
    r.gamma_ro = gamma_r * 7.0 / 8.0;
    r.deph_z = 100.0;
    r.deph_r = deph_r;
    return r;
}

void reject_unknown(const json& obj, const std::string& where, std::initializer_list<std::string_view> allowed) {
    if (!obj.is_object()) throw ConfigError(where, "expected an object");
    for (const auto& [key, value] : obj.items()) {
        bool ok = false;
        for (auto a : allowed) ok = ok || key == a;
        if (!ok) throw ConfigError(where.empty() ? key : where + "." + key, "unknown key");
    }
}

template <typename T>
void read(const json& obj, const std::string& where, const char* key, T& out) {
    if (!obj.contains(key)) return;
    const std::string path = where.empty() ? std::string(key) : where + "." + key;
    try {
        out = obj.at(key).get<T>();
    } catch (const json::exception& e) {
        throw ConfigError(path, std::string("bad value (") + e.what() + ")");
    }
}

void read_rates(const json& obj, const std::string& where, model::RelaxationRates& r) {
    reject_unknown(obj, where, {"gamma0", "gamma1", "gamma_r0", "gamma_r1", "gamma_ro", "deph_z", "deph_r"});
    read(obj, where, "gamma0", r.gamma0);
    read(obj, where, "gamma1", r.gamma1);
    read(obj, where, "gamma_r0", r.gamma_r0);
    read(obj, where, "gamma_r1", r.gamma_r1);
    read(obj, where, "gamma_ro", r.gamma_ro);
    read(obj, where, "deph_z", r.deph_z);
    read(obj, where, "deph_r", r.deph_r);
}

json write_rates(const model::RelaxationRates& r) {
    return json{{"gamma0", r.gamma0},     {"gamma1", r.gamma1},     {"gamma_r0", r.gamma_r0},
                {"gamma_r1", r.gamma_r1}, {"gamma_ro", r.gamma_ro}, {"deph_z", r.deph_z},
                {"deph_r", r.deph_r}};
}

void read_physics(const json& obj, PhysicalConfig& ph) {
    const std::string w = "physics";
    reject_unknown(obj, w,
                   {"omega_mw_khz_over_2pi", "delta_mw_over_omega_mw", "omega_l_mhz_over_2pi", "gap_ns",
                    "rates_per_s", "ancilla_rates_per_s", "v_aa_over_linewidth", "v_aa_mhz_over_2pi",
                    "positions_um", "c_p_mhz_um_p_over_2pi", "p"});
    read(obj, w, "omega_mw_khz_over_2pi", ph.omega_mw_khz_over_2pi);
    read(obj, w, "delta_mw_over_omega_mw", ph.delta_mw_over_omega_mw);
    read(obj, w, "omega_l_mhz_over_2pi", ph.omega_l_mhz_over_2pi);
    read(obj, w, "gap_ns", ph.gap_ns);
    if (obj.contains("rates_per_s")) read_rates(obj.at("rates_per_s"), w + ".rates_per_s", ph.rates);
    if (obj.contains("ancilla_rates_per_s"))
        read_rates(obj.at("ancilla_rates_per_s"), w + ".ancilla_rates_per_s", ph.ancilla_rates);

    const int blockade_keys = static_cast<int>(obj.contains("v_aa_over_linewidth")) +
                              static_cast<int>(obj.contains("v_aa_mhz_over_2pi")) +
                              static_cast<int>(obj.contains("positions_um"));
    if (blockade_keys > 1)
        throw ConfigError(w, "give only one of v_aa_over_linewidth, v_aa_mhz_over_2pi, positions_um");
    if (blockade_keys == 1) {
        ph.v_aa_over_linewidth.reset();
        ph.v_aa_mhz_over_2pi.reset();
        ph.positions_um.clear();
    }
    if (obj.contains("v_aa_over_linewidth")) {
        double v = 0.0;
        read(obj, w, "v_aa_over_linewidth", v);
        ph.v_aa_over_linewidth = v;
    }
    if (obj.contains("v_aa_mhz_over_2pi")) {
        double v = 0.0;
        read(obj, w, "v_aa_mhz_over_2pi", v);
        ph.v_aa_mhz_over_2pi = v;
    }
    if (obj.contains("positions_um")) {
        std::vector<std::array<double, 3>> pts;
        read(obj, w, "positions_um", pts);
        for (const auto& q : pts) ph.positions_um.emplace_back(q[0], q[1], q[2]);
    }
    read(obj, w, "c_p_mhz_um_p_over_2pi", ph.c_p_mhz_um_p_over_2pi);
    read(obj, w, "p", ph.p);
}

void read_run(const json& obj, RunConfig& run) {
    const std::string w = "run";
    reject_unknown(obj, w,
                   {"iterations", "trajectories", "seed", "threads", "estimator", "count_rydberg_as_nonzero", "out",
                    "resolution", "me_resolution", "trace_mode", "trace_trajectory", "trace_interval_ns"});
    read(obj, w, "iterations", run.iterations);
    read(obj, w, "trajectories", run.trajectories);
    if (obj.contains("seed")) {
        std::uint64_t s = 0;
        read(obj, w, "seed", s);
        run.seed = s;
    }
    read(obj, w, "threads", run.threads);
    if (obj.contains("estimator")) {
        std::string e;
        read(obj, w, "estimator", e);
        try {
            run.estimator = analysis::parse_estimator(e);
        } catch (const std::invalid_argument& ex) {
            throw ConfigError("run.estimator", ex.what());
        }
    }
    read(obj, w, "count_rydberg_as_nonzero", run.count_rydberg_as_nonzero);
    read(obj, w, "out", run.out);
    read(obj, w, "resolution", run.resolution);
    read(obj, w, "me_resolution", run.me_resolution);
    read(obj, w, "trace_mode", run.trace_mode);
    read(obj, w, "trace_trajectory", run.trace_trajectory);
    read(obj, w, "trace_interval_ns", run.trace_interval_ns);
}

}  // namespace

hilbert::Scheme parse_scheme(std::string_view text) {
    if (text == "direct") return hilbert::Scheme::DirectBlockade;
    if (text == "ancilla") return hilbert::Scheme::AncillaBlockade;
    throw ConfigError("register.scheme", "expected 'direct' or 'ancilla', got '" + std::string(text) + "'");
}

std::vector<std::string> preset_names() { return {"a1", "b1", "c1", "a2", "b2", "c2", "ideal"}; }

PhysicalConfig preset(std::string_view name) {
    PhysicalConfig ph;
    ph.omega_mw_khz_over_2pi = 20.0;
    ph.delta_mw_over_omega_mw = 25.0;
    ph.gap_ns = 50.0;
    ph.v_aa_over_linewidth = model::kDefaultShiftOverLinewidth;

    if (name == "ideal") {
        // No Rydberg decay leaves w undefined; use its Gamma_r -> 0 limit
        // |Omega_l| / sqrt(2) and V = 1e3 w.
        ph.omega_l_mhz_over_2pi = 0.5;
        ph.delta_mw_over_omega_mw = 1e4;
        ph.v_aa_over_linewidth.reset();
        ph.v_aa_mhz_over_2pi = 1e3 * ph.omega_l_mhz_over_2pi / std::sqrt(2.0);
        return ph;
    }
    if (name.size() != 2) throw ConfigError("preset", "unknown preset '" + std::string(name) + "'");
    switch (name[0]) {
    case 'a': ph.rates = family_rates(1e3, 1e3); break;
    case 'b': ph.rates = family_rates(4.76e3, 1e4); break;
    case 'c': ph.rates = family_rates(1e5, 1e5); break;
    default: throw ConfigError("preset", "unknown preset '" + std::string(name) + "'");
    }
    switch (name[1]) {
    case '1': ph.omega_l_mhz_over_2pi = 0.5; break;
    case '2': ph.omega_l_mhz_over_2pi = 2.0; break;
    default: throw ConfigError("preset", "unknown preset '" + std::string(name) + "'");
    }
    return ph;
}

ExperimentConfig default_config() {
    ExperimentConfig cfg;
    cfg.preset = "b1";
    cfg.physics = preset(cfg.preset);
    return cfg;
}

ExperimentConfig parse(std::string_view json_text, const ExperimentConfig& base) {
    json doc;
    try {
        doc = json::parse(json_text);
    } catch (const json::parse_error& e) {
        throw ConfigError("", std::string("malformed config: ") + e.what());
    }
    reject_unknown(doc, "", {"register", "preset", "physics", "run"});

    ExperimentConfig cfg = base;
    if (doc.contains("register")) {
        const json& reg = doc.at("register");
        reject_unknown(reg, "register", {"k", "scheme", "marked"});
        read(reg, "register", "k", cfg.k);
        if (reg.contains("scheme")) {
            std::string s;
            read(reg, "register", "scheme", s);
            cfg.scheme = parse_scheme(s);
        }
        read(reg, "register", "marked", cfg.marked);
    }
    if (doc.contains("preset")) {
        read(doc, "", "preset", cfg.preset);
        // An empty name keeps the base physics.
        if (!cfg.preset.empty()) cfg.physics = preset(cfg.preset);
    }
    if (doc.contains("physics")) read_physics(doc.at("physics"), cfg.physics);
    if (doc.contains("run")) read_run(doc.at("run"), cfg.run);
    return cfg;
}

ExperimentConfig load(const std::string& path, const ExperimentConfig& base) {
    std::ifstream in(path);
    if (!in) throw ConfigError("config", "cannot read '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse(ss.str(), base);
}

std::string serialize(const ExperimentConfig& cfg) {
    json doc;
    doc["register"] = {{"k", cfg.k}, {"scheme", hilbert::to_string(cfg.scheme)}, {"marked", cfg.marked}};
    const auto& ph = cfg.physics;
    json phys = {{"omega_mw_khz_over_2pi", ph.omega_mw_khz_over_2pi},
                 {"delta_mw_over_omega_mw", ph.delta_mw_over_omega_mw},
                 {"omega_l_mhz_over_2pi", ph.omega_l_mhz_over_2pi},
                 {"gap_ns", ph.gap_ns},
                 {"rates_per_s", write_rates(ph.rates)},
                 {"ancilla_rates_per_s", write_rates(ph.ancilla_rates)},
                 {"c_p_mhz_um_p_over_2pi", ph.c_p_mhz_um_p_over_2pi},
                 {"p", ph.p}};
    if (ph.v_aa_over_linewidth) phys["v_aa_over_linewidth"] = *ph.v_aa_over_linewidth;
    if (ph.v_aa_mhz_over_2pi) phys["v_aa_mhz_over_2pi"] = *ph.v_aa_mhz_over_2pi;
    if (!ph.positions_um.empty()) {
        json pts = json::array();
        for (const auto& q : ph.positions_um) pts.push_back({q.x(), q.y(), q.z()});
        phys["positions_um"] = pts;
    }
    doc["physics"] = phys;
    doc["preset"] = cfg.preset;
    const auto& r = cfg.run;
    json run = {{"iterations", r.iterations},
                {"trajectories", r.trajectories},
                {"threads", r.threads},
                {"estimator", analysis::to_string(r.estimator)},
                {"count_rydberg_as_nonzero", r.count_rydberg_as_nonzero},
                {"out", r.out},
                {"resolution", r.resolution},
                {"me_resolution", r.me_resolution},
                {"trace_mode", r.trace_mode},
                {"trace_trajectory", r.trace_trajectory},
                {"trace_interval_ns", r.trace_interval_ns}};
    if (r.seed) run["seed"] = *r.seed;
    doc["run"] = run;
    return doc.dump(2) + "\n";
}

model::SystemModel Resolved::build_model() const { return model::SystemModel(reg, rates, ancilla_rates, interaction); }

schedule::Schedule Resolved::build_schedule(std::size_t iterations) const {
    return schedule::compile_algorithm(reg, pulses, iterations);
}

Resolved resolve(const ExperimentConfig& cfg) {
    Resolved out;
    const auto& ph = cfg.physics;

    if (cfg.k < 1 || cfg.k > hilbert::kMaxRegisterAtoms)
        throw ConfigError("register.k", "must be between 1 and " + std::to_string(hilbert::kMaxRegisterAtoms));
    try {
        out.reg = hilbert::RegisterConfig{cfg.k, cfg.scheme, hilbert::Bitstring::parse(cfg.marked)};
        out.reg.validate();
    } catch (const std::invalid_argument& e) {
        throw ConfigError("register.marked", e.what());
    }

    if (!(ph.omega_mw_khz_over_2pi > 0.0)) throw ConfigError("physics.omega_mw_khz_over_2pi", "must be > 0");
    if (!(ph.delta_mw_over_omega_mw >= 0.0)) throw ConfigError("physics.delta_mw_over_omega_mw", "must be >= 0");
    if (!(ph.omega_l_mhz_over_2pi > 0.0)) throw ConfigError("physics.omega_l_mhz_over_2pi", "must be > 0");
    if (!(ph.gap_ns >= 0.0)) throw ConfigError("physics.gap_ns", "must be >= 0");
    try {
        ph.rates.validate();
    } catch (const std::invalid_argument& e) {
        throw ConfigError("physics.rates_per_s", e.what());
    }
    try {
        ph.ancilla_rates.validate();
    } catch (const std::invalid_argument& e) {
        throw ConfigError("physics.ancilla_rates_per_s", e.what());
    }

    out.pulses.omega_mw = kTwoPi * 1e3 * ph.omega_mw_khz_over_2pi;
    out.pulses.delta_mw = ph.delta_mw_over_omega_mw * out.pulses.omega_mw;
    out.pulses.omega_l = kTwoPi * 1e6 * ph.omega_l_mhz_over_2pi;
    out.pulses.gap = ph.gap_ns * 1e-9;
    out.rates.assign(cfg.k, ph.rates);
    out.ancilla_rates = ph.ancilla_rates;
    if (!out.reg.has_ancilla() && !ph.ancilla_rates.all_zero())
        throw ConfigError("physics.ancilla_rates_per_s", "the direct scheme has no ancilla");
    if (out.reg.has_ancilla() && !ph.ancilla_rates.all_zero())
        out.warnings.push_back("ancilla relaxation is experimental: only R->g decay and g-R dephasing are modeled");

    const int blockade_keys = static_cast<int>(ph.v_aa_over_linewidth.has_value()) +
                              static_cast<int>(ph.v_aa_mhz_over_2pi.has_value()) +
                              static_cast<int>(!ph.positions_um.empty());
    if (blockade_keys != 1)
        throw ConfigError("physics", "exactly one of v_aa_over_linewidth, v_aa_mhz_over_2pi, positions_um is required");

    std::optional<double> linewidth;
    try {
        linewidth = model::blockade_linewidth(out.pulses.omega_l, ph.rates).w;
    } catch (const UndefinedLinewidth&) {
    }

    try {
        if (ph.v_aa_over_linewidth) {
            if (!linewidth)
                throw ConfigError("physics.v_aa_over_linewidth", "linewidth undefined without Rydberg decay");
            if (!(*ph.v_aa_over_linewidth > 0.0)) throw ConfigError("physics.v_aa_over_linewidth", "must be > 0");
            out.interaction = model::InteractionSpec::uniform(out.reg, *ph.v_aa_over_linewidth * *linewidth);
        } else if (ph.v_aa_mhz_over_2pi) {
            if (!(*ph.v_aa_mhz_over_2pi > 0.0)) throw ConfigError("physics.v_aa_mhz_over_2pi", "must be > 0");
            out.interaction = model::InteractionSpec::uniform(out.reg, kTwoPi * 1e6 * *ph.v_aa_mhz_over_2pi);
        } else {
            if (ph.positions_um.size() != out.reg.layout().atom_count())
                throw ConfigError("physics.positions_um", "need one position per atom (ancilla last)");
            if (ph.p != 3 && ph.p != 6) throw ConfigError("physics.p", "must be 3 or 6");
            if (!(ph.c_p_mhz_um_p_over_2pi > 0.0)) throw ConfigError("physics.c_p_mhz_um_p_over_2pi", "must be > 0");
            std::vector<Eigen::Vector3d> pos;
            for (const auto& q : ph.positions_um) pos.push_back(q * 1e-6);
            const double c_p = kTwoPi * 1e6 * ph.c_p_mhz_um_p_over_2pi * std::pow(1e-6, ph.p);
            out.interaction = model::InteractionSpec::from_positions(pos, c_p, ph.p, out.reg);
        }
    } catch (const std::invalid_argument& e) {
        throw ConfigError("physics", e.what());
    }

    if (linewidth && out.interaction.min_pair_shift(out.reg) < model::kBlockadeMargin * *linewidth)
        out.warnings.push_back("blockade shift below 10 linewidths; blockade is not sufficient");

    const auto& run = cfg.run;
    if (run.iterations < 1) throw ConfigError("run.iterations", "must be >= 1");
    if (run.trajectories < 1) throw ConfigError("run.trajectories", "must be >= 1");
    if (run.threads < 1) throw ConfigError("run.threads", "must be >= 1");
    if (!(run.resolution > 0.0)) throw ConfigError("run.resolution", "must be > 0");
    if (!(run.me_resolution > 0.0)) throw ConfigError("run.me_resolution", "must be > 0");
    if (run.trace_mode != "trajectory" && run.trace_mode != "me")
        throw ConfigError("run.trace_mode", "expected 'trajectory' or 'me'");
    if (!(run.trace_interval_ns >= 0.0)) throw ConfigError("run.trace_interval_ns", "must be >= 0");
    out.policy.count_rydberg = run.count_rydberg_as_nonzero;
    return out;
}

}  // namespace rydgrover::config
