#include "kinobs/config.hpp"

#include <cmath>
#include <functional>
#include <map>
#include <set>
#include <sstream>

#include "kinobs/io.hpp"

namespace kinobs {

namespace {

struct Entry {
    std::string value;
    int line;
};

using Section = std::map<std::string, Entry, std::less<>>;

const std::map<std::string_view, std::set<std::string_view>> kKeys = {
    {"model",
     {"type", "g", "profile", "observer_mode", "speed", "t_final", "cfl_safety", "dt", "h_dry",
      "bathymetry", "thacker_a", "thacker_L", "thacker_hm", "bump_center", "bump_height",
      "bump_width"}},
    {"grid", {"n_cells", "x_min", "x_max", "bc", "n_xi", "xi_margin"}},
    {"truth",
     {"ic", "value", "background", "x0", "x1", "offset", "amplitude", "wavenumber", "h_left",
      "h_right", "eta", "u0", "refinement"}},
    {"observer",
     {"ic", "value", "background", "x0", "x1", "offset", "amplitude", "wavenumber", "h_left",
      "h_right", "eta", "u0"}},
    {"gain", {"lambda", "mask", "temporal", "sigma"}},
    {"observations", {"times", "count", "t_start", "t_end", "interval", "mask", "interpolate"}},
    {"noise", {"epsilon", "r", "alpha", "kind", "seed"}},
    {"output", {"record_every", "sobolev_order", "csv"}},
};

class Reader {
public:
    explicit Reader(std::map<std::string, Section, std::less<>> sections)
        : sections_(std::move(sections)) {}

    bool has_section(std::string_view s) const { return sections_.count(s) > 0; }

    const Entry* find(std::string_view section, std::string_view key) const {
        auto s = sections_.find(section);
        if (s == sections_.end()) return nullptr;
        auto k = s->second.find(key);
        return k == s->second.end() ? nullptr : &k->second;
    }

    template <typename F>
    void with(std::string_view section, std::string_view key, F&& apply) const {
        const Entry* e = find(section, key);
        if (!e) return;
        try {
            apply(std::string_view(e->value));
        } catch (const ConfigError&) {
            throw;
        } catch (const std::exception& ex) {
            throw ConfigError(std::string(section) + "." + std::string(key) + ": " + ex.what(),
                              e->line);
        }
    }

    void number(std::string_view section, std::string_view key, double& out) const {
        with(section, key, [&](std::string_view v) { out = parse_double(v); });
    }

    void integer(std::string_view section, std::string_view key, int& out) const {
        with(section, key, [&](std::string_view v) {
            const long x = parse_long(v);
            if (x < -2147483647L || x > 2147483647L) throw std::invalid_argument("out of range");
            out = static_cast<int>(x);
        });
    }

private:
    std::map<std::string, Section, std::less<>> sections_;
};

bool parse_bool(std::string_view v) {
    v = trim(v);
    if (v == "true" || v == "yes" || v == "1") return true;
    if (v == "false" || v == "no" || v == "0") return false;
    throw std::invalid_argument("expected true or false, got '" + std::string(v) + "'");
}

std::optional<MaskInterval> parse_mask(std::string_view v) {
    v = trim(v);
    if (v == "full") return std::nullopt;
    const auto parts = split(v, ',');
    if (parts.size() != 2) throw std::invalid_argument("expected 'full' or 'a,b'");
    return MaskInterval{parse_double(parts[0]), parse_double(parts[1])};
}

std::vector<double> parse_list(std::string_view v) {
    std::vector<double> out;
    if (trim(v).empty()) return out;
    for (auto part : split(v, ',')) out.push_back(parse_double(part));
    return out;
}

void read_ic(const Reader& r, std::string_view s, InitialCondition& ic) {
    r.with(s, "ic", [&](std::string_view v) { ic.kind = ic_kind_from_string(trim(v)); });
    r.number(s, "value", ic.value);
    r.number(s, "background", ic.background);
    r.number(s, "x0", ic.x0);
    r.number(s, "x1", ic.x1);
    r.number(s, "offset", ic.offset);
    r.number(s, "amplitude", ic.amplitude);
    r.number(s, "wavenumber", ic.wavenumber);
    r.number(s, "h_left", ic.h_left);
    r.number(s, "h_right", ic.h_right);
    r.number(s, "eta", ic.eta);
    r.number(s, "u0", ic.u0);
}

Reader tokenize(std::string_view text) {
    std::map<std::string, Section, std::less<>> sections;
    std::string current;
    int line_no = 0;
    for (std::string_view raw : split(text, '\n')) {
        ++line_no;
        std::string_view line = trim(raw);
        if (line.empty() || line.front() == '#' || line.front() == ';') continue;
        if (line.front() == '[') {
            if (line.back() != ']') throw ConfigError("unterminated section header", line_no);
            current = std::string(trim(line.substr(1, line.size() - 2)));
            if (!kKeys.count(current)) throw ConfigError("unknown section [" + current + "]", line_no);
            if (sections.count(current)) throw ConfigError("duplicate section [" + current + "]", line_no);
            sections[current];
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string_view::npos) throw ConfigError("expected 'key = value'", line_no);
        const std::string key(trim(line.substr(0, eq)));
        std::string_view value = trim(line.substr(eq + 1));
        if (const auto hash = value.find(" #"); hash != std::string_view::npos) {
            value = trim(value.substr(0, hash));
        }
        if (current.empty()) throw ConfigError("key '" + key + "' outside any section", line_no);
        if (key.empty()) throw ConfigError("empty key", line_no);
        if (!kKeys.at(current).count(key)) {
            throw ConfigError("unknown key '" + key + "' in [" + current + "]", line_no);
        }
        auto& sec = sections[current];
        if (sec.count(key)) throw ConfigError("duplicate key '" + key + "'", line_no);
        sec[key] = {std::string(value), line_no};
    }
    return Reader(std::move(sections));
}

std::vector<double> resolve_times(const Reader& r, double t_final) {
    std::vector<double> times;
    const bool explicit_times = r.find("observations", "times") != nullptr;
    const bool count = r.find("observations", "count") != nullptr;
    const bool interval = r.find("observations", "interval") != nullptr;
    if (int(explicit_times) + int(count) + int(interval) > 1) {
        throw ConfigError("observations: give only one of times, count, interval");
    }
    double t_start = 0.0;
    double t_end = t_final;
    r.number("observations", "t_start", t_start);
    r.number("observations", "t_end", t_end);
    if (explicit_times) {
        r.with("observations", "times", [&](std::string_view v) { times = parse_list(v); });
    } else if (count) {
        int n = 0;
        r.integer("observations", "count", n);
        if (n < 1) throw ConfigError("observations.count: must be at least 1");
        if (!(t_end >= t_start)) throw ConfigError("observations.t_end: must not precede t_start");
        for (int k = 0; k < n; ++k) {
            times.push_back(n == 1 ? t_start : t_start + (t_end - t_start) * k / (n - 1));
        }
        if (n > 1) times.back() = t_end;
    } else if (interval) {
        double dt = 0.0;
        r.number("observations", "interval", dt);
        if (!(dt > 0.0)) throw ConfigError("observations.interval: must be positive");
        for (long k = 0;; ++k) {
            const double t = t_start + static_cast<double>(k) * dt;
            if (t > t_end + 1e-9 * dt) break;
            times.push_back(std::min(t, t_end));
        }
    }
    return times;
}

}  // namespace

ParsedConfig parse_config_text(std::string_view text) {
    const Reader r = tokenize(text);
    ParsedConfig out;
    RunConfig& c = out.run;

    r.with("model", "type", [&](std::string_view v) { c.model = model_kind_from_string(trim(v)); });
    if (c.model == ModelKind::ShallowWater) {
        c.bc = BoundaryKind::ReflectiveWall;
        c.x_max = 4.0;
        c.gain.temporal = TemporalMode::EveryStep;
    }
    r.number("model", "g", c.gravity);
    r.with("model", "profile",
           [&](std::string_view v) { c.profile = ChiProfile(chi_kind_from_string(trim(v))); });
    r.with("model", "observer_mode",
           [&](std::string_view v) { c.observer_mode = observer_mode_from_string(trim(v)); });
    r.number("model", "speed", c.advection_speed);
    r.number("model", "t_final", c.t_final);
    r.number("model", "cfl_safety", c.cfl_safety);
    r.with("model", "dt", [&](std::string_view v) { c.dt_fixed = parse_double(v); });
    r.number("model", "h_dry", c.h_dry);
    r.with("model", "bathymetry",
           [&](std::string_view v) { c.bathymetry = bathymetry_kind_from_string(trim(v)); });
    r.number("model", "thacker_a", c.thacker.a);
    r.number("model", "thacker_L", c.thacker.L);
    r.number("model", "thacker_hm", c.thacker.h_m);
    r.number("model", "bump_center", c.bump.center);
    r.number("model", "bump_height", c.bump.height);
    r.number("model", "bump_width", c.bump.width);

    r.integer("grid", "n_cells", c.n_cells);
    r.number("grid", "x_min", c.x_min);
    r.number("grid", "x_max", c.x_max);
    r.with("grid", "bc", [&](std::string_view v) { c.bc = boundary_kind_from_string(trim(v)); });
    r.integer("grid", "n_xi", c.n_xi);
    r.number("grid", "xi_margin", c.xi_margin);

    read_ic(r, "truth", c.truth);
    r.integer("truth", "refinement", c.truth_refinement);
    read_ic(r, "observer", c.observer);

    r.number("gain", "lambda", c.gain.lambda);
    r.with("gain", "mask", [&](std::string_view v) { c.gain.mask = parse_mask(v); });
    r.with("gain", "temporal",
           [&](std::string_view v) { c.gain.temporal = temporal_mode_from_string(trim(v)); });
    r.number("gain", "sigma", c.gain.sigma);

    c.obs_times = resolve_times(r, c.t_final);
    r.with("observations", "mask", [&](std::string_view v) { c.obs_mask = parse_mask(v); });
    r.with("observations", "interpolate",
           [&](std::string_view v) { c.obs_interpolate = parse_bool(v); });

    if (r.has_section("noise")) {
        NoiseSpec n;
        r.number("noise", "epsilon", n.epsilon);
        r.number("noise", "r", n.r);
        r.number("noise", "alpha", n.alpha);
        r.with("noise", "kind", [&](std::string_view v) {
            v = trim(v);
            if (v == "oscillatory") n.kind = NoiseKind::Oscillatory;
            else if (v == "uniform") n.kind = NoiseKind::Uniform;
            else throw std::invalid_argument("expected oscillatory or uniform");
        });
        r.with("noise", "seed", [&](std::string_view v) {
            const long s = parse_long(v);
            if (s < 0) throw std::invalid_argument("must be nonnegative");
            n.seed = static_cast<std::uint64_t>(s);
        });
        if (n.epsilon < 0.0) throw ConfigError("noise.epsilon: must be nonnegative");
        if (n.epsilon > 0.0) c.noise = n;
    }

    r.integer("output", "record_every", c.record_every);
    r.number("output", "sobolev_order", c.sobolev_order);
    r.with("output", "csv", [&](std::string_view v) { out.csv = std::string(trim(v)); });

    try {
        c.validate();
    } catch (const std::invalid_argument& e) {
        throw ConfigError(e.what());
    }
    return out;
}

ParsedConfig parse_config(const std::filesystem::path& path) {
    std::string text;
    try {
        text = read_file(path);
    } catch (const std::exception& e) {
        throw ConfigError(e.what());
    }
    try {
        return parse_config_text(text);
    } catch (const ConfigError& e) {
        throw ConfigError(path.string() + ": " + e.what());
    }
}

std::string echo_config(const RunConfig& c) {
    std::ostringstream o;
    auto num = [](double v) { return format_double(v); };
    auto mask = [&](const std::optional<MaskInterval>& m) {
        return m ? num(m->a) + "," + num(m->b) : std::string("full");
    };
    auto ic = [&](const char* name, const InitialCondition& v) {
        o << "\n[" << name << "]\n"
          << "ic = " << to_string(v.kind) << "\n"
          << "value = " << num(v.value) << "\n"
          << "background = " << num(v.background) << "\n"
          << "x0 = " << num(v.x0) << "\n"
          << "x1 = " << num(v.x1) << "\n"
          << "offset = " << num(v.offset) << "\n"
          << "amplitude = " << num(v.amplitude) << "\n"
          << "wavenumber = " << num(v.wavenumber) << "\n"
          << "h_left = " << num(v.h_left) << "\n"
          << "h_right = " << num(v.h_right) << "\n"
          << "eta = " << num(v.eta) << "\n"
          << "u0 = " << num(v.u0) << "\n";
    };
    o << "[model]\n"
      << "type = " << to_string(c.model) << "\n"
      << "g = " << num(c.gravity) << "\n"
      << "profile = " << to_string(c.profile.kind()) << "\n"
      << "observer_mode = " << to_string(c.observer_mode) << "\n"
      << "speed = " << num(c.advection_speed) << "\n"
      << "t_final = " << num(c.t_final) << "\n"
      << "cfl_safety = " << num(c.cfl_safety) << "\n";
    if (c.dt_fixed) o << "dt = " << num(*c.dt_fixed) << "\n";
    o << "h_dry = " << num(c.h_dry) << "\n"
      << "bathymetry = " << to_string(c.bathymetry) << "\n"
      << "thacker_a = " << num(c.thacker.a) << "\n"
      << "thacker_L = " << num(c.thacker.L) << "\n"
      << "thacker_hm = " << num(c.thacker.h_m) << "\n"
      << "bump_center = " << num(c.bump.center) << "\n"
      << "bump_height = " << num(c.bump.height) << "\n"
      << "bump_width = " << num(c.bump.width) << "\n"
      << "\n[grid]\n"
      << "n_cells = " << c.n_cells << "\n"
      << "x_min = " << num(c.x_min) << "\n"
      << "x_max = " << num(c.x_max) << "\n"
      << "bc = " << to_string(c.bc) << "\n"
      << "n_xi = " << c.n_xi << "\n"
      << "xi_margin = " << num(c.xi_margin) << "\n";
    ic("truth", c.truth);
    o << "refinement = " << c.truth_refinement << "\n";
    ic("observer", c.observer);
    o << "\n[gain]\n"
      << "lambda = " << num(c.gain.lambda) << "\n"
      << "mask = " << mask(c.gain.mask) << "\n"
      << "temporal = " << to_string(c.gain.temporal) << "\n"
      << "sigma = " << num(c.gain.sigma) << "\n"
      << "\n[observations]\n"
      << "times = ";
    for (std::size_t k = 0; k < c.obs_times.size(); ++k) {
        o << (k ? "," : "") << num(c.obs_times[k]);
    }
    o << "\n"
      << "mask = " << mask(c.obs_mask) << "\n"
      << "interpolate = " << (c.obs_interpolate ? "true" : "false") << "\n";
    if (c.noise) {
        o << "\n[noise]\n"
          << "epsilon = " << num(c.noise->epsilon) << "\n"
          << "r = " << num(c.noise->r) << "\n"
          << "alpha = " << num(c.noise->alpha) << "\n"
          << "kind = " << (c.noise->kind == NoiseKind::Uniform ? "uniform" : "oscillatory") << "\n"
          << "seed = " << c.noise->seed << "\n";
    }
    o << "\n[output]\n"
      << "record_every = " << c.record_every << "\n"
      << "sobolev_order = " << num(c.sobolev_order) << "\n";
    return o.str();
}

}  // namespace kinobs
