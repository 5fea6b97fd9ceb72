#include "qlocal/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <numbers>
#include <set>
#include <sstream>

namespace qlocal {

namespace {

std::string join(const std::vector<std::string>& parts, const char* sep) {
    std::string out;
    for (std::size_t i = 0; i < parts.size(); ++i) {
        if (i) out += sep;
        out += parts[i];
    }
    return out;
}

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

std::vector<std::string> split_words(const std::string& s) {
    std::vector<std::string> out;
    std::string word;
    for (char c : s) {
        if (c == ' ' || c == '\t' || c == ',') {
            if (!word.empty()) out.push_back(word);
            word.clear();
        } else {
            word += c;
        }
    }
    if (!word.empty()) out.push_back(word);
    return out;
}

struct Parser {
    std::vector<std::string> errors;

    void fail(const std::string& msg) { errors.push_back(msg); }

    bool to_double(const std::string& section, const std::string& key, const std::string& value,
                   double& out) {
        char* end = nullptr;
        const double v = std::strtod(value.c_str(), &end);
        if (end == value.c_str() || *end != '\0') {
            fail("[" + section + "] " + key + ": expected a number, got '" + value + "'");
            return false;
        }
        out = v;
        return true;
    }

    bool to_int(const std::string& section, const std::string& key, const std::string& value,
                int& out) {
        char* end = nullptr;
        const long v = std::strtol(value.c_str(), &end, 10);
        if (end == value.c_str() || *end != '\0') {
            fail("[" + section + "] " + key + ": expected an integer, got '" + value + "'");
            return false;
        }
        out = int(v);
        return true;
    }

    bool to_ulong(const std::string& section, const std::string& key, const std::string& value,
                  unsigned long& out) {
        char* end = nullptr;
        const unsigned long v = std::strtoul(value.c_str(), &end, 10);
        if (end == value.c_str() || *end != '\0') {
            fail("[" + section + "] " + key + ": expected an unsigned integer, got '" + value +
                 "'");
            return false;
        }
        out = v;
        return true;
    }

    bool to_bool(const std::string& section, const std::string& key, const std::string& value,
                 bool& out) {
        if (value == "true" || value == "1" || value == "yes") {
            out = true;
            return true;
        }
        if (value == "false" || value == "0" || value == "no") {
            out = false;
            return true;
        }
        fail("[" + section + "] " + key + ": expected true/false, got '" + value + "'");
        return false;
    }

    bool to_double_list(const std::string& section, const std::string& key,
                        const std::string& value, std::vector<double>& out) {
        out.clear();
        for (const auto& w : split_words(value)) {
            double v = 0.0;
            if (!to_double(section, key, w, v)) return false;
            out.push_back(v);
        }
        return true;
    }
};

using SectionMap = std::map<std::string, std::map<std::string, std::string>>;

SectionMap read_sections(const std::string& text, Parser& p) {
    SectionMap sections;
    std::istringstream in(text);
    std::string line;
    std::string current;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']') {
                p.fail("line " + std::to_string(lineno) + ": malformed section header '" + line +
                       "'");
                continue;
            }
            current = trim(line.substr(1, line.size() - 2));
            sections[current];
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            p.fail("line " + std::to_string(lineno) + ": expected key = value, got '" + line +
                   "'");
            continue;
        }
        if (current.empty()) {
            p.fail("line " + std::to_string(lineno) + ": key outside any [section]");
            continue;
        }
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (sections[current].count(key))
            p.fail("[" + current + "] duplicate key '" + key + "'");
        sections[current][key] = value;
    }
    return sections;
}

void check_known_keys(Parser& p, const std::string& section,
                      const std::map<std::string, std::string>& kv,
                      const std::set<std::string>& known) {
    for (const auto& [key, value] : kv) {
        (void)value;
        if (!known.count(key))
            p.fail("[" + section + "] unknown key '" + key + "' (known: " +
                   join(std::vector<std::string>(known.begin(), known.end()), ", ") + ")");
    }
}

const std::set<std::string> kProfiles = {"zero",    "uniform_field", "sine_field",
                                         "harmonic", "barrier",       "well"};
const std::set<std::string> kEnvelopes = {"constant", "ramp", "sinusoid"};
const std::set<std::string> kInitialKinds = {"gaussian", "relax", "plane_wave"};
const std::set<std::string> kSymmetries = {"none", "symmetric", "antisymmetric"};

}  // namespace

ScenarioError::ScenarioError(std::vector<std::string> errs)
    : std::runtime_error("scenario validation failed:\n  " + join(errs, "\n  ")),
      errors(std::move(errs)) {}

const std::vector<std::string>& known_observers() {
    static const std::vector<std::string> names = {
        "norm",        "energy_total", "total_power", "boundary_density", "presence",
        "local_energy", "local_power", "balance",     "continuity",       "closed_limit"};
    return names;
}

Scenario parse_scenario(const std::string& text, const std::string& id_hint) {
    Parser p;
    SectionMap sections = read_sections(text, p);

    Scenario s;
    s.id = id_hint;

    for (const auto& [name, kv] : sections) {
        (void)kv;
        static const std::set<std::string> known = {"scenario", "grid",      "potentials",
                                                    "initial",  "time",      "omega",
                                                    "observers", "verify",   "output"};
        if (!known.count(name)) p.fail("unknown section [" + name + "]");
    }
    for (const char* required : {"grid", "initial", "time"})
        if (!sections.count(required))
            p.fail("missing required section [" + std::string(required) + "]");

    if (auto it = sections.find("scenario"); it != sections.end()) {
        check_known_keys(p, "scenario", it->second, {"name"});
        if (auto k = it->second.find("name"); k != it->second.end()) s.id = k->second;
    }

    if (auto it = sections.find("grid"); it != sections.end()) {
        const auto& kv = it->second;
        check_known_keys(p, "grid", kv, {"particles", "points", "length", "periodic"});
        if (auto k = kv.find("particles"); k != kv.end()) p.to_int("grid", "particles", k->second, s.grid.particles);
        if (auto k = kv.find("points"); k != kv.end()) p.to_int("grid", "points", k->second, s.grid.points);
        if (auto k = kv.find("length"); k != kv.end()) p.to_double("grid", "length", k->second, s.grid.length);
        if (auto k = kv.find("periodic"); k != kv.end()) p.to_bool("grid", "periodic", k->second, s.grid.periodic);
        if (s.grid.particles < 1) p.fail("[grid] particles must be >= 1");
        if (s.grid.points < 4) p.fail("[grid] points must be >= 4");
        if (!(s.grid.length > 0.0)) p.fail("[grid] length must be positive");
    }

    if (auto it = sections.find("potentials"); it != sections.end()) {
        const auto& kv = it->second;
        check_known_keys(p, "potentials", kv,
                         {"profile", "f0", "wavelength", "omega0", "height", "center", "width",
                          "softness", "envelope", "value", "ramp_time", "amplitude", "frequency",
                          "phase", "soft_core"});
        auto& pot = s.potentials;
        if (auto k = kv.find("profile"); k != kv.end()) {
            pot.profile = k->second;
            if (!kProfiles.count(pot.profile))
                p.fail("[potentials] unknown profile '" + pot.profile + "' (available: " +
                       join(std::vector<std::string>(kProfiles.begin(), kProfiles.end()), ", ") +
                       ")");
        }
        if (auto k = kv.find("envelope"); k != kv.end()) {
            pot.envelope = k->second;
            if (!kEnvelopes.count(pot.envelope))
                p.fail("[potentials] unknown envelope '" + pot.envelope + "' (available: " +
                       join(std::vector<std::string>(kEnvelopes.begin(), kEnvelopes.end()), ", ") +
                       ")");
        }
        if (auto k = kv.find("f0"); k != kv.end()) p.to_double("potentials", "f0", k->second, pot.f0);
        if (auto k = kv.find("wavelength"); k != kv.end()) p.to_double("potentials", "wavelength", k->second, pot.wavelength);
        if (auto k = kv.find("omega0"); k != kv.end()) p.to_double("potentials", "omega0", k->second, pot.omega0);
        if (auto k = kv.find("height"); k != kv.end()) p.to_double("potentials", "height", k->second, pot.height);
        if (auto k = kv.find("center"); k != kv.end()) p.to_double("potentials", "center", k->second, pot.center);
        if (auto k = kv.find("width"); k != kv.end()) p.to_double("potentials", "width", k->second, pot.width);
        if (auto k = kv.find("softness"); k != kv.end()) p.to_double("potentials", "softness", k->second, pot.softness);
        if (auto k = kv.find("value"); k != kv.end()) p.to_double("potentials", "value", k->second, pot.value);
        if (auto k = kv.find("ramp_time"); k != kv.end()) p.to_double("potentials", "ramp_time", k->second, pot.ramp_time);
        if (auto k = kv.find("amplitude"); k != kv.end()) p.to_double("potentials", "amplitude", k->second, pot.amplitude);
        if (auto k = kv.find("frequency"); k != kv.end()) p.to_double("potentials", "frequency", k->second, pot.frequency);
        if (auto k = kv.find("phase"); k != kv.end()) p.to_double("potentials", "phase", k->second, pot.phase);
        if (auto k = kv.find("soft_core"); k != kv.end()) p.to_double("potentials", "soft_core", k->second, pot.soft_core);
        if (!(pot.soft_core > 0.0)) p.fail("[potentials] soft_core must be positive");
        if ((pot.profile == "barrier" || pot.profile == "well") && !(pot.softness > 0.0))
            p.fail("[potentials] softness must be positive for barrier/well profiles");
        if (pot.profile == "sine_field") {
            if (!(pot.wavelength > 0.0)) {
                p.fail("[potentials] sine_field needs wavelength > 0");
            } else if (s.grid.periodic && s.grid.length > 0.0) {
                // The whole point of this profile is box periodicity.
                const double harmonics = s.grid.length / pot.wavelength;
                if (std::abs(harmonics - std::round(harmonics)) > 1e-9 * harmonics)
                    p.fail("[potentials] sine_field wavelength must divide the box length");
            }
        }
    }

    if (auto it = sections.find("initial"); it != sections.end()) {
        const auto& kv = it->second;
        check_known_keys(p, "initial", kv,
                         {"kind", "center", "width", "momentum", "plane_momentum", "symmetry",
                          "perturb", "seed", "relax_dtau", "relax_tol", "relax_max_iters"});
        auto& ini = s.initial;
        if (auto k = kv.find("kind"); k != kv.end()) {
            ini.kind = k->second;
            if (!kInitialKinds.count(ini.kind))
                p.fail("[initial] unknown kind '" + ini.kind + "' (available: " +
                       join(std::vector<std::string>(kInitialKinds.begin(), kInitialKinds.end()),
                            ", ") +
                       ")");
        }
        if (auto k = kv.find("center"); k != kv.end()) p.to_double_list("initial", "center", k->second, ini.center);
        if (auto k = kv.find("width"); k != kv.end()) p.to_double_list("initial", "width", k->second, ini.width);
        if (auto k = kv.find("momentum"); k != kv.end()) p.to_double_list("initial", "momentum", k->second, ini.momentum);
        if (auto k = kv.find("plane_momentum"); k != kv.end()) p.to_double("initial", "plane_momentum", k->second, ini.plane_momentum);
        if (auto k = kv.find("symmetry"); k != kv.end()) {
            ini.symmetry = k->second;
            if (!kSymmetries.count(ini.symmetry))
                p.fail("[initial] unknown symmetry '" + ini.symmetry + "'");
        }
        if (auto k = kv.find("perturb"); k != kv.end()) p.to_double("initial", "perturb", k->second, ini.perturb);
        if (auto k = kv.find("seed"); k != kv.end()) p.to_ulong("initial", "seed", k->second, ini.seed);
        if (auto k = kv.find("relax_dtau"); k != kv.end()) p.to_double("initial", "relax_dtau", k->second, ini.relax_dtau);
        if (auto k = kv.find("relax_tol"); k != kv.end()) p.to_double("initial", "relax_tol", k->second, ini.relax_tol);
        if (auto k = kv.find("relax_max_iters"); k != kv.end()) p.to_int("initial", "relax_max_iters", k->second, ini.relax_max_iters);

        auto fit_list = [&](std::vector<double>& list, const char* key, double fallback) {
            if (list.empty()) list.assign(std::size_t(s.grid.particles), fallback);
            if (list.size() == 1 && s.grid.particles > 1)
                list.assign(std::size_t(s.grid.particles), list[0]);
            if (list.size() != std::size_t(s.grid.particles))
                p.fail(std::string("[initial] ") + key + ": expected " +
                       std::to_string(s.grid.particles) + " values, got " +
                       std::to_string(list.size()));
        };
        if (ini.kind == "gaussian") {
            fit_list(ini.center, "center", 0.0);
            fit_list(ini.width, "width", 1.0);
            fit_list(ini.momentum, "momentum", 0.0);
            for (double w : ini.width)
                if (!(w > 0.0)) p.fail("[initial] width values must be positive");
        }
        if (ini.symmetry != "none" && s.grid.particles < 2)
            p.fail("[initial] symmetry projection needs at least two particles");
        if (ini.kind == "relax") {
            if (!(ini.relax_dtau > 0.0)) p.fail("[initial] relax_dtau must be positive");
            if (!(ini.relax_tol > 0.0)) p.fail("[initial] relax_tol must be positive");
            fit_list(ini.center, "center", 0.0);
            fit_list(ini.width, "width", 1.0);
        }
    }

    if (auto it = sections.find("time"); it != sections.end()) {
        const auto& kv = it->second;
        check_known_keys(p, "time", kv, {"t_end", "dt", "sample_stride"});
        if (auto k = kv.find("t_end"); k != kv.end()) p.to_double("time", "t_end", k->second, s.time.t_end);
        if (auto k = kv.find("dt"); k != kv.end()) p.to_double("time", "dt", k->second, s.time.dt);
        if (auto k = kv.find("sample_stride"); k != kv.end()) p.to_int("time", "sample_stride", k->second, s.time.sample_stride);
        if (!(s.time.dt > 0.0)) p.fail("[time] dt must be positive");
        if (s.time.t_end < 0.0) p.fail("[time] t_end must be >= 0");
        if (s.time.sample_stride < 1) p.fail("[time] sample_stride must be >= 1");
    }

    // Omega intervals are given by value as lo:hi and snapped to the grid.
    const double dx = s.grid.length / double(std::max(s.grid.points, 1));
    const double x0 = -0.5 * s.grid.length;
    auto snap_index = [&](double x) { return int(std::lround((x - x0) / dx)); };
    if (auto it = sections.find("omega"); it != sections.end()) {
        const auto& kv = it->second;
        check_known_keys(p, "omega", kv, {"intervals"});
        if (auto k = kv.find("intervals"); k != kv.end()) {
            for (const auto& word : split_words(k->second)) {
                const auto colon = word.find(':');
                if (colon == std::string::npos) {
                    p.fail("[omega] intervals: expected lo:hi, got '" + word + "'");
                    continue;
                }
                double lo = 0.0, hi = 0.0;
                if (!p.to_double("omega", "intervals", word.substr(0, colon), lo)) continue;
                if (!p.to_double("omega", "intervals", word.substr(colon + 1), hi)) continue;
                if (!(lo < hi)) {
                    p.fail("[omega] intervals: need lo < hi in '" + word + "'");
                    continue;
                }
                const double x_last = x0 + dx * double(s.grid.points - 1);
                if (lo < x0 - 0.5 * dx || hi > x_last + 0.5 * dx) {
                    p.fail("[omega] intervals: '" + word + "' lies outside the box [" +
                           std::to_string(x0) + ", " + std::to_string(x_last) + "]");
                    continue;
                }
                ResolvedOmega ro;
                ro.requested_lo = lo;
                ro.requested_hi = hi;
                ro.region.lower_index = std::clamp(snap_index(lo), 0, s.grid.points - 1);
                ro.region.upper_index = std::clamp(snap_index(hi), 0, s.grid.points - 1);
                ro.snap_distance =
                    std::max(std::abs(lo - (x0 + dx * ro.region.lower_index)),
                             std::abs(hi - (x0 + dx * ro.region.upper_index)));
                if (ro.region.lower_index >= ro.region.upper_index) {
                    p.fail("[omega] intervals: '" + word + "' collapses to an empty region after snapping");
                    continue;
                }
                s.omegas.push_back(ro);
            }
        }
    }

    if (auto it = sections.find("observers"); it != sections.end()) {
        const auto& kv = it->second;
        check_known_keys(p, "observers", kv, {"names"});
        if (auto k = kv.find("names"); k != kv.end()) {
            for (const auto& name : split_words(k->second)) {
                const auto& known = known_observers();
                if (std::find(known.begin(), known.end(), name) == known.end())
                    p.fail("[observers] unknown observer '" + name + "' (available: " +
                           join(known, ", ") + ")");
                else
                    s.observers.push_back(name);
            }
        }
    }
    if (s.observers.empty()) s.observers = {"norm"};

    if (auto it = sections.find("verify"); it != sections.end()) {
        const auto& kv = it->second;
        check_known_keys(p, "verify", kv,
                         {"norm_drift_max", "energy_drift_max", "balance_normalized_max",
                          "balance_abs_max", "continuity_max", "closed_cross_max",
                          "closed_cancel_max", "closed_cross_abs_max", "closed_cancel_abs_max",
                          "presence_symmetry_max", "node_epsilon", "boundary_density_max"});
        auto opt = [&](const char* key, std::optional<double>& slot) {
            if (auto k = kv.find(key); k != kv.end()) {
                double v = 0.0;
                if (p.to_double("verify", key, k->second, v)) slot = v;
            }
        };
        if (auto k = kv.find("norm_drift_max"); k != kv.end()) p.to_double("verify", "norm_drift_max", k->second, s.verify.norm_drift_max);
        opt("energy_drift_max", s.verify.energy_drift_max);
        opt("balance_normalized_max", s.verify.balance_normalized_max);
        opt("balance_abs_max", s.verify.balance_abs_max);
        opt("continuity_max", s.verify.continuity_max);
        opt("closed_cross_max", s.verify.closed_cross_max);
        opt("closed_cancel_max", s.verify.closed_cancel_max);
        opt("closed_cross_abs_max", s.verify.closed_cross_abs_max);
        opt("closed_cancel_abs_max", s.verify.closed_cancel_abs_max);
        opt("presence_symmetry_max", s.verify.presence_symmetry_max);
        if (auto k = kv.find("node_epsilon"); k != kv.end()) p.to_double("verify", "node_epsilon", k->second, s.verify.node_epsilon);
        if (auto k = kv.find("boundary_density_max"); k != kv.end()) p.to_double("verify", "boundary_density_max", k->second, s.verify.boundary_density_max);
        if (!(s.verify.node_epsilon > 0.0) || s.verify.node_epsilon > 1e-2)
            p.fail("[verify] node_epsilon must lie in (0, 1e-2]");
    }

    if (auto it = sections.find("output"); it != sections.end()) {
        const auto& kv = it->second;
        check_known_keys(p, "output", kv, {"directory", "formats"});
        if (auto k = kv.find("directory"); k != kv.end()) s.output.directory = k->second;
        if (auto k = kv.find("formats"); k != kv.end()) {
            s.output.csv = false;
            s.output.json = false;
            for (const auto& fmt : split_words(k->second)) {
                if (fmt == "csv")
                    s.output.csv = true;
                else if (fmt == "json")
                    s.output.json = true;
                else
                    p.fail("[output] unknown format '" + fmt + "' (available: csv, json)");
            }
        }
    }

    // Plane-wave momentum snaps to a resolvable grid mode.
    if (s.initial.kind == "plane_wave" && s.grid.length > 0.0 && s.grid.points >= 4) {
        const double dk = 2.0 * std::numbers::pi / s.grid.length;
        const long m = std::lround(s.initial.plane_momentum / dk);
        if (std::abs(m) > s.grid.points / 2 - 1)
            p.fail("[initial] plane_momentum is not resolvable on this grid");
        s.plane_momentum_snapped = dk * double(m);
        s.plane_momentum_snap_distance =
            std::abs(s.initial.plane_momentum - s.plane_momentum_snapped);
    }

    // Check the step count is whole once, here, so the runner can trust it.
    if (s.time.dt > 0.0 && s.time.t_end >= 0.0) {
        const double steps = s.time.t_end / s.time.dt;
        if (std::abs(steps - std::round(steps)) > 1e-9 * std::max(1.0, steps))
            p.fail("[time] t_end/dt must be a whole number of steps");
    }

    if (!p.errors.empty()) throw ScenarioError(std::move(p.errors));
    return s;
}

Scenario load_scenario_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open scenario file: " + path);
    std::stringstream buffer;
    buffer << in.rdbuf();
    const std::string id = std::filesystem::path(path).stem().string();
    return parse_scenario(buffer.str(), id);
}

}  // namespace qlocal
