#pragma once

#include <charconv>
#include <cstdint>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "sgp/common.hpp"
#include "sgp/spectral_measure.hpp"
#include "sgp/spectrum.hpp"

namespace sgp {

// Flat key-value configuration with [section] headers.  Keys are stored as
// "section.key"; values round-trip losslessly (doubles are written with
// shortest-exact formatting).

inline std::string format_double(double v) {
    char buf[40];
    auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

class Config {
public:
    static Config parse(const std::string& text) {
        Config c;
        std::istringstream in(text);
        std::string line, section;
        std::size_t lineno = 0;
        while (std::getline(in, line)) {
            ++lineno;
            const std::string s = trim(strip_comment(line));
            if (s.empty()) continue;
            if (s.front() == '[') {
                if (s.back() != ']')
                    throw std::invalid_argument("config line " + std::to_string(lineno) +
                                                ": unterminated section");
                section = trim(s.substr(1, s.size() - 2));
                continue;
            }
            const auto eq = s.find('=');
            if (eq == std::string::npos)
                throw std::invalid_argument("config line " + std::to_string(lineno) +
                                            ": expected key = value");
            const std::string key = trim(s.substr(0, eq));
            const std::string val = trim(s.substr(eq + 1));
            if (key.empty())
                throw std::invalid_argument("config line " + std::to_string(lineno) +
                                            ": empty key");
            c.kv_[section.empty() ? key : section + "." + key] = val;
        }
        return c;
    }

    static Config load(const std::string& path) {
        std::ifstream in(path);
        if (!in) throw std::runtime_error("cannot open config file: " + path);
        std::ostringstream ss;
        ss << in.rdbuf();
        return parse(ss.str());
    }

    std::string save() const {
        std::ostringstream os;
        std::string current;
        bool first = true;
        for (const auto& [k, v] : kv_) {
            const auto dot = k.find('.');
            const std::string section = dot == std::string::npos ? "" : k.substr(0, dot);
            const std::string key = dot == std::string::npos ? k : k.substr(dot + 1);
            if (section != current || first) {
                if (!first) os << '\n';
                os << '[' << section << "]\n";
                current = section;
                first = false;
            }
            os << key << " = " << v << '\n';
        }
        return os.str();
    }

    void write(const std::string& path) const {
        std::ofstream out(path);
        if (!out) throw std::runtime_error("cannot write config file: " + path);
        out << save();
    }

    bool has(const std::string& key) const { return kv_.count(key) > 0; }

    std::string get_string(const std::string& key, const std::string& dflt) const {
        auto it = kv_.find(key);
        return it == kv_.end() ? dflt : it->second;
    }

    double get_double(const std::string& key, double dflt) const {
        auto it = kv_.find(key);
        if (it == kv_.end()) return dflt;
        try {
            return std::stod(it->second);
        } catch (const std::exception&) {
            throw std::invalid_argument("config: bad numeric value for " + key);
        }
    }

    long long get_int(const std::string& key, long long dflt) const {
        auto it = kv_.find(key);
        if (it == kv_.end()) return dflt;
        try {
            return std::stoll(it->second);
        } catch (const std::exception&) {
            throw std::invalid_argument("config: bad integer value for " + key);
        }
    }

    std::uint64_t get_u64(const std::string& key, std::uint64_t dflt) const {
        auto it = kv_.find(key);
        if (it == kv_.end()) return dflt;
        try {
            return std::stoull(it->second);
        } catch (const std::exception&) {
            throw std::invalid_argument("config: bad unsigned value for " + key);
        }
    }

    std::vector<double> get_list(const std::string& key) const {
        auto it = kv_.find(key);
        std::vector<double> out;
        if (it == kv_.end()) return out;
        std::istringstream ss(it->second);
        std::string tok;
        while (std::getline(ss, tok, ',')) {
            tok = trim(tok);
            if (!tok.empty()) out.push_back(std::stod(tok));
        }
        return out;
    }

    void set(const std::string& key, const std::string& v) { kv_[key] = v; }
    void set(const std::string& key, double v) { kv_[key] = format_double(v); }
    void set(const std::string& key, long long v) { kv_[key] = std::to_string(v); }
    void set(const std::string& key, std::uint64_t v) { kv_[key] = std::to_string(v); }

    void set_list(const std::string& key, const std::vector<double>& vs) {
        std::string s;
        for (std::size_t i = 0; i < vs.size(); ++i) {
            if (i) s += ", ";
            s += format_double(vs[i]);
        }
        kv_[key] = s;
    }

    const std::map<std::string, std::string>& entries() const { return kv_; }

private:
    static std::string strip_comment(const std::string& s) {
        for (std::size_t i = 0; i < s.size(); ++i)
            if (s[i] == '#' || s[i] == ';') return s.substr(0, i);
        return s;
    }

    static std::string trim(const std::string& s) {
        std::size_t a = 0, b = s.size();
        while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
        while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
        return s.substr(a, b - a);
    }

    std::map<std::string, std::string> kv_;
};

// The experiment description used by every CLI command.
struct ExperimentConfig {
    std::string measure_kind = "aifs"; // aifs | atomic | density
    double rho = 0.25;
    std::vector<double> atom_points;
    std::vector<double> atom_weights;
    std::string density_name = "uniform"; // uniform | ou
    double density_half_width = 0.5;
    double ou_theta = 1.0;
    double ou_alpha = 1.0;

    std::string spectrum_family = "digit"; // digit | linear (designed failure)
    int m = 2;
    std::size_t count = 128;

    TruncationBudget budget;

    double t_min = 0.0;
    double t_max = 1.0;
    std::size_t grid_points = 201;

    std::size_t paths = 1000;
    std::uint64_t seed = 42;
    double deficit_threshold = 1e-2;

    std::string out_dir = "out";

    static ExperimentConfig from_config(const Config& c) {
        ExperimentConfig e;
        e.measure_kind = c.get_string("measure.kind", e.measure_kind);
        e.rho = c.get_double("measure.rho", e.rho);
        e.atom_points = c.get_list("measure.points");
        e.atom_weights = c.get_list("measure.weights");
        e.density_name = c.get_string("measure.density", e.density_name);
        e.density_half_width = c.get_double("measure.half_width", e.density_half_width);
        e.ou_theta = c.get_double("measure.theta", e.ou_theta);
        e.ou_alpha = c.get_double("measure.alpha", e.ou_alpha);
        e.spectrum_family = c.get_string("spectrum.family", e.spectrum_family);
        e.m = static_cast<int>(c.get_int("spectrum.m", e.m));
        e.count = static_cast<std::size_t>(c.get_int("spectrum.count",
                                                     static_cast<long long>(e.count)));
        e.budget.product_depth =
            static_cast<int>(c.get_int("budget.product_depth", e.budget.product_depth));
        e.budget.quadrature_level = static_cast<int>(
            c.get_int("budget.quadrature_level", e.budget.quadrature_level));
        e.budget.abs_tol = c.get_double("budget.abs_tol", e.budget.abs_tol);
        e.t_min = c.get_double("grid.t_min", e.t_min);
        e.t_max = c.get_double("grid.t_max", e.t_max);
        e.grid_points = static_cast<std::size_t>(
            c.get_int("grid.points", static_cast<long long>(e.grid_points)));
        e.paths = static_cast<std::size_t>(
            c.get_int("ensemble.paths", static_cast<long long>(e.paths)));
        e.seed = c.get_u64("ensemble.seed", e.seed);
        e.deficit_threshold =
            c.get_double("ensemble.deficit_threshold", e.deficit_threshold);
        e.out_dir = c.get_string("output.dir", e.out_dir);
        e.validate();
        return e;
    }

    Config to_config() const {
        Config c;
        c.set("measure.kind", measure_kind);
        c.set("measure.rho", rho);
        if (!atom_points.empty()) {
            c.set_list("measure.points", atom_points);
            c.set_list("measure.weights", atom_weights);
        }
        c.set("measure.density", density_name);
        c.set("measure.half_width", density_half_width);
        c.set("measure.theta", ou_theta);
        c.set("measure.alpha", ou_alpha);
        c.set("spectrum.family", spectrum_family);
        c.set("spectrum.m", static_cast<long long>(m));
        c.set("spectrum.count", static_cast<long long>(count));
        c.set("budget.product_depth", static_cast<long long>(budget.product_depth));
        c.set("budget.quadrature_level",
              static_cast<long long>(budget.quadrature_level));
        c.set("budget.abs_tol", budget.abs_tol);
        c.set("grid.t_min", t_min);
        c.set("grid.t_max", t_max);
        c.set("grid.points", static_cast<long long>(grid_points));
        c.set("ensemble.paths", static_cast<long long>(paths));
        c.set("ensemble.seed", seed);
        c.set("ensemble.deficit_threshold", deficit_threshold);
        c.set("output.dir", out_dir);
        return c;
    }

    void validate() const {
        budget.validate();
        if (grid_points < 2) throw std::invalid_argument("config: grid.points must be >= 2");
        if (!(t_max > t_min)) throw std::invalid_argument("config: t_max must exceed t_min");
        if (measure_kind != "aifs" && measure_kind != "atomic" && measure_kind != "density")
            throw std::invalid_argument("config: unknown measure.kind " + measure_kind);
        if (spectrum_family != "digit" && spectrum_family != "linear")
            throw std::invalid_argument("config: unknown spectrum.family " + spectrum_family);
    }

    SpectralMeasure make_measure() const {
        if (measure_kind == "aifs") return SpectralMeasure::aifs(rho);
        if (measure_kind == "atomic")
            return SpectralMeasure::atomic(atom_points, atom_weights);
        if (density_name == "uniform") {
            const double hw = density_half_width;
            return SpectralMeasure::density(
                [hw](double u) { return std::fabs(u) <= hw ? 1.0 / (2.0 * hw) : 0.0; },
                hw, /*even=*/true);
        }
        if (density_name == "ou") {
            const double a2 = ou_alpha * ou_alpha;
            const double th = ou_theta;
            return SpectralMeasure::density(
                [a2, th](double u) {
                    return (a2 / (2.0 * kPi)) * (u * u) / (th * th + u * u);
                },
                std::numeric_limits<double>::infinity(), /*even=*/true, 1,
                a2 / (2.0 * kPi));
        }
        throw std::invalid_argument("config: unknown measure.density " + density_name);
    }

    Spectrum make_spectrum() const {
        if (spectrum_family == "linear") {
            // deliberately wrong family: 2 pi {0, 1, 2, ...} is not a
            // spectrum for the AIFS measures and must fail the Parseval check
            std::vector<double> freqs(count);
            for (std::size_t n = 0; n < count; ++n)
                freqs[n] = kTwoPi * static_cast<double>(n);
            Spectrum s = listed_spectrum(std::move(freqs));
            return s;
        }
        return generate_spectrum(m, count);
    }

    std::vector<double> make_grid() const {
        std::vector<double> t(grid_points);
        for (std::size_t i = 0; i < grid_points; ++i)
            t[i] = t_min + (t_max - t_min) * static_cast<double>(i) /
                                static_cast<double>(grid_points - 1);
        return t;
    }
};

} // namespace sgp
