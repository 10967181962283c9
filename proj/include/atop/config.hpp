#pragma once

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "atop/anisotropy.hpp"
#include "atop/elasticity.hpp"
#include "atop/errors.hpp"
#include "atop/mesh.hpp"

namespace atop {

enum class InitKind { Random, Ball, Stripe, FromFile };

/// Fully resolved run configuration. parse_config() fills every default, so
/// two configs describing the same run compare equal and
/// parse_config(print_config(cfg)) == cfg.
struct SimConfig {
    // mesh
    Rect domain;
    int nx{0}, ny{0};
    std::vector<TagRule> dirichlet_rules;  // DirichletFull / DirichletX / DirichletY segments

    // physics
    Anisotropy aniso;
    ElasticityModel elasticity;
    LoadSpec loads;
    bool loads_enabled{true};

    // phase field
    double eps{0.0};
    double tau{0.0};  // resolved to eps * h when the file omits it
    double alpha_hat{1.0};
    double beta{1.0};
    double m{0.0};
    double mass_tol_rel{1e-8};
    double steady_tol{1e-6};
    double inner_tol{1e-10};
    int picard_max{30};  // re-linearizations of B per step; 1 = strictly lagged

    // run control
    double t_end{0.0};
    unsigned long seed{1};
    InitKind init{InitKind::Random};
    Vec2 ball_center{0.0, 0.0};
    double ball_radius{0.2};
    double stripe_y0{0.0};
    double stripe_amplitude{0.1};
    int stripe_frequency{4};
    std::string init_file;
    int snapshot_every{0};  // steps between snapshots; 0 = final state only

    double hx() const { return domain.width() / nx; }
    double hy() const { return domain.height() / ny; }
    double h() const { return std::min(hx(), hy()); }

    /// Mesh tag rules: Dirichlet segments plus one Traction rule per pad.
    std::vector<TagRule> mesh_rules() const {
        std::vector<TagRule> rules = dirichlet_rules;
        for (const TractionPad& p : loads.pads) rules.push_back({p.segment, EdgeTag::Traction});
        return rules;
    }

    bool operator==(const SimConfig&) const = default;
};

/// Raw key = value document, kept so sweeps can overwrite one entry and
/// re-resolve.
struct ConfigDocument {
    // section -> key -> (value, line)
    std::map<std::string, std::map<std::string, std::pair<std::string, int>>> sections;

    bool has(const std::string& section, const std::string& key) const {
        auto s = sections.find(section);
        return s != sections.end() && s->second.count(key) > 0;
    }
    void set(const std::string& section, const std::string& key, const std::string& value) {
        sections[section][key] = {value, 0};
    }
};

namespace cfgdetail {

inline std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
    return s;
}

inline double parse_double(const std::string& key, std::string_view v) {
    double out = 0.0;
    const char* first = v.data();
    const char* last = v.data() + v.size();
    auto [ptr, ec] = std::from_chars(first, last, out);
    if (ec != std::errc{} || ptr != last) throw ValidationError(key, "a number");
    return out;
}

inline long parse_int(const std::string& key, std::string_view v) {
    long out = 0;
    auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
    if (ec != std::errc{} || ptr != v.data() + v.size()) throw ValidationError(key, "an integer");
    return out;
}

inline bool parse_bool(const std::string& key, std::string_view v) {
    if (v == "true") return true;
    if (v == "false") return false;
    throw ValidationError(key, "true or false");
}

inline Vec2 parse_vec(const std::string& key, std::string_view v) {
    v = trim(v);
    if (v.size() < 2 || v.front() != '(' || v.back() != ')') throw ValidationError(key, "a vector (a, b)");
    v = v.substr(1, v.size() - 2);
    const size_t comma = v.find(',');
    if (comma == std::string_view::npos) throw ValidationError(key, "a vector (a, b)");
    return {parse_double(key, trim(v.substr(0, comma))), parse_double(key, trim(v.substr(comma + 1)))};
}

inline Segment parse_segment(const std::string& key, std::string_view v) {
    v = trim(v);
    const size_t c1 = v.find(':');
    const size_t c2 = c1 == std::string_view::npos ? c1 : v.find(':', c1 + 1);
    if (c2 == std::string_view::npos) throw ValidationError(key, "a segment side:lo:hi");
    const std::string_view side = trim(v.substr(0, c1));
    Segment s;
    if (side == "left") s.side = Side::Left;
    else if (side == "right") s.side = Side::Right;
    else if (side == "bottom") s.side = Side::Bottom;
    else if (side == "top") s.side = Side::Top;
    else throw ValidationError(key, "a segment with side left|right|bottom|top");
    s.lo = parse_double(key, trim(v.substr(c1 + 1, c2 - c1 - 1)));
    s.hi = parse_double(key, trim(v.substr(c2 + 1)));
    return s;
}

inline std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

inline std::string fmt(const Vec2& v) { return "(" + fmt(v.x) + ", " + fmt(v.y) + ")"; }

inline std::string fmt(const Segment& s) { return side_name(s.side) + ":" + fmt(s.lo) + ":" + fmt(s.hi); }

/// Accessor over one section with required/optional lookups and
/// unknown-key rejection.
struct SectionReader {
    const ConfigDocument& doc;
    std::string name;
    std::vector<std::string> known;

    bool has(const std::string& key) {
        known.push_back(key);
        return doc.has(name, key);
    }
    std::string get(const std::string& key) const {
        return doc.sections.at(name).at(key).first;
    }
    std::string require(const std::string& key) {
        if (!has(key)) throw ValidationError(name + "." + key, "present (required key)");
        return get(key);
    }
    double number(const std::string& key, double fallback) {
        return has(key) ? parse_double(name + "." + key, get(key)) : fallback;
    }
    void finish() const {
        auto s = doc.sections.find(name);
        if (s == doc.sections.end()) return;
        for (const auto& [key, value] : s->second)
            if (std::find(known.begin(), known.end(), key) == known.end())
                throw ValidationError(name + "." + key, "a recognized key (unknown keys are rejected)");
    }
};

}  // namespace cfgdetail

/// Parse the `[section]` / `key = value` text into the raw document.
/// `#` starts a full-line comment.
inline ConfigDocument parse_document(const std::string& text) {
    ConfigDocument doc;
    std::string section;
    int line_no = 0;
    size_t pos = 0;
    while (pos <= text.size()) {
        const size_t nl = text.find('\n', pos);
        std::string_view line(text.data() + pos, (nl == std::string::npos ? text.size() : nl) - pos);
        pos = nl == std::string::npos ? text.size() + 1 : nl + 1;
        ++line_no;
        line = cfgdetail::trim(line);
        if (line.empty() || line.front() == '#') continue;
        if (line.front() == '[') {
            if (line.back() != ']') throw ParseError(line_no, "unterminated section header");
            section = std::string(cfgdetail::trim(line.substr(1, line.size() - 2)));
            if (section.empty()) throw ParseError(line_no, "empty section name");
            continue;
        }
        const size_t eq = line.find('=');
        if (eq == std::string_view::npos) throw ParseError(line_no, "expected key = value");
        if (section.empty()) throw ParseError(line_no, "key outside of a [section]");
        const std::string key(cfgdetail::trim(line.substr(0, eq)));
        const std::string value(cfgdetail::trim(line.substr(eq + 1)));
        if (key.empty()) throw ParseError(line_no, "empty key");
        if (doc.sections[section].count(key)) throw ParseError(line_no, "duplicate key " + key);
        doc.sections[section][key] = {value, line_no};
    }
    return doc;
}

/// Resolve the raw document into a validated SimConfig with all defaults
/// applied.
inline SimConfig resolve_config(const ConfigDocument& doc) {
    using namespace cfgdetail;
    SimConfig cfg;

    for (const auto& [name, keys] : doc.sections) {
        (void)keys;
        if (name != "mesh" && name != "anisotropy" && name != "elasticity" &&
            name != "phasefield" && name != "loads" && name != "run")
            throw ValidationError(name, "a recognized section (mesh, anisotropy, elasticity, phasefield, loads, run)");
    }

    SectionReader mesh{doc, "mesh", {}};
    cfg.domain.x0 = parse_double("mesh.x0", mesh.require("x0"));
    cfg.domain.x1 = parse_double("mesh.x1", mesh.require("x1"));
    cfg.domain.y0 = parse_double("mesh.y0", mesh.require("y0"));
    cfg.domain.y1 = parse_double("mesh.y1", mesh.require("y1"));
    if (cfg.domain.x1 <= cfg.domain.x0) throw ValidationError("mesh.x1", "greater than x0");
    if (cfg.domain.y1 <= cfg.domain.y0) throw ValidationError("mesh.y1", "greater than y0");
    cfg.nx = static_cast<int>(parse_int("mesh.nx", mesh.require("nx")));
    cfg.ny = static_cast<int>(parse_int("mesh.ny", mesh.require("ny")));
    if (cfg.nx < 2) throw ValidationError("mesh.nx", "an integer >= 2");
    if (cfg.ny < 2) throw ValidationError("mesh.ny", "an integer >= 2");
    const auto add_rule = [&](const std::string& key, EdgeTag tag) {
        if (mesh.has(key))
            cfg.dirichlet_rules.push_back({parse_segment("mesh." + key, mesh.get(key)), tag});
    };
    add_rule("dirichlet", EdgeTag::DirichletFull);
    add_rule("dirichlet2", EdgeTag::DirichletFull);
    add_rule("dirichlet_x", EdgeTag::DirichletX);
    add_rule("dirichlet_y", EdgeTag::DirichletY);
    mesh.finish();

    SectionReader aniso{doc, "anisotropy", {}};
    const std::string kind = aniso.require("kind");
    const auto alpha_of = [&]() {
        const double a = parse_double("anisotropy.alpha", aniso.require("alpha"));
        if (!(a > 0.0 && a <= 1.0)) throw ValidationError("anisotropy.alpha", "in (0,1]");
        return a;
    };
    if (kind == "isotropic") {
        cfg.aniso = Anisotropy::isotropic();
    } else if (kind == "convex_overhang") {
        cfg.aniso = Anisotropy::convex_overhang(alpha_of());
    } else if (kind == "regularized_overhang") {
        const double a = alpha_of();
        const double d = parse_double("anisotropy.delta", aniso.require("delta"));
        if (!(d > 0.0)) throw ValidationError("anisotropy.delta", "positive");
        cfg.aniso = Anisotropy::regularized_overhang(a, d);
    } else if (kind == "nonconvex_overhang") {
        const double a = alpha_of();
        const double l = parse_double("anisotropy.lambda", aniso.require("lambda"));
        if (!(l > 0.0 && l < 1.0)) throw ValidationError("anisotropy.lambda", "in (0,1)");
        cfg.aniso = Anisotropy::nonconvex_overhang(a, l);
    } else {
        throw ValidationError("anisotropy.kind",
                              "one of isotropic, convex_overhang, regularized_overhang, nonconvex_overhang");
    }
    aniso.finish();

    SectionReader elast{doc, "elasticity", {}};
    cfg.elasticity.youngs_modulus = elast.number("youngs_modulus", 1.0);
    if (!(cfg.elasticity.youngs_modulus > 0.0)) throw ValidationError("elasticity.youngs_modulus", "positive");
    cfg.elasticity.poisson_ratio = elast.number("poisson_ratio", 0.33);
    if (!(cfg.elasticity.poisson_ratio > -1.0 && cfg.elasticity.poisson_ratio < 0.5))
        throw ValidationError("elasticity.poisson_ratio", "in (-1, 0.5)");
    cfg.elasticity.ersatz_factor = elast.number("ersatz_factor", 1e-2);
    if (!(cfg.elasticity.ersatz_factor > 0.0 && cfg.elasticity.ersatz_factor < 1.0))
        throw ValidationError("elasticity.ersatz_factor", "in (0,1)");
    elast.finish();

    SectionReader loads{doc, "loads", {}};
    if (loads.has("body_force")) cfg.loads.body_force = parse_vec("loads.body_force", loads.get("body_force"));
    const auto add_pad = [&](const std::string& pad_key, const std::string& g_key) {
        const bool hp = loads.has(pad_key);
        const bool hg = loads.has(g_key);
        if (hp != hg) throw ValidationError("loads." + (hp ? g_key : pad_key), "present when the other of pad/g is set");
        if (hp)
            cfg.loads.pads.push_back({parse_segment("loads." + pad_key, loads.get(pad_key)),
                                      parse_vec("loads." + g_key, loads.get(g_key))});
    };
    add_pad("pad", "g");
    add_pad("pad2", "g2");
    cfg.loads.g_scale = loads.number("g_scale", 1.0);
    if (loads.has("enabled")) cfg.loads_enabled = parse_bool("loads.enabled", loads.get("enabled"));
    loads.finish();

    SectionReader pf{doc, "phasefield", {}};
    cfg.eps = parse_double("phasefield.eps", pf.require("eps"));
    if (!(cfg.eps > 0.0)) throw ValidationError("phasefield.eps", "positive");
    cfg.alpha_hat = pf.number("alpha_hat", 1.0);
    if (!(cfg.alpha_hat >= 0.0)) throw ValidationError("phasefield.alpha_hat", "non-negative");
    cfg.beta = pf.number("beta", 1.0);
    if (!(cfg.beta >= 0.0)) throw ValidationError("phasefield.beta", "non-negative");
    cfg.m = parse_double("phasefield.m", pf.require("m"));
    if (!(cfg.m > -1.0 && cfg.m < 1.0)) throw ValidationError("phasefield.m", "in (-1,1)");
    cfg.tau = pf.number("tau", cfg.eps * cfg.h());
    if (!(cfg.tau > 0.0)) throw ValidationError("phasefield.tau", "positive");
    cfg.mass_tol_rel = pf.number("mass_tol", 1e-8);
    if (!(cfg.mass_tol_rel > 0.0)) throw ValidationError("phasefield.mass_tol", "positive");
    cfg.steady_tol = pf.number("steady_tol", 1e-6);
    if (!(cfg.steady_tol >= 0.0)) throw ValidationError("phasefield.steady_tol", "non-negative");
    cfg.inner_tol = pf.number("inner_tol", 1e-10);
    if (!(cfg.inner_tol > 0.0)) throw ValidationError("phasefield.inner_tol", "positive");
    if (pf.has("picard_max")) {
        cfg.picard_max = static_cast<int>(parse_int("phasefield.picard_max", pf.get("picard_max")));
        if (cfg.picard_max < 1) throw ValidationError("phasefield.picard_max", "a positive integer");
    }
    pf.finish();

    SectionReader run{doc, "run", {}};
    cfg.t_end = parse_double("run.t_end", run.require("t_end"));
    if (!(cfg.t_end >= cfg.tau)) throw ValidationError("run.t_end", "at least one time step (t_end >= tau)");
    if (run.has("seed")) cfg.seed = static_cast<unsigned long>(parse_int("run.seed", run.get("seed")));
    const std::string init = run.has("init") ? run.get("init") : "random";
    if (init == "random") cfg.init = InitKind::Random;
    else if (init == "ball") cfg.init = InitKind::Ball;
    else if (init == "stripe") cfg.init = InitKind::Stripe;
    else if (init == "from_file") cfg.init = InitKind::FromFile;
    else throw ValidationError("run.init", "one of random, ball, stripe, from_file");
    if (run.has("ball_center")) cfg.ball_center = parse_vec("run.ball_center", run.get("ball_center"));
    cfg.ball_radius = run.number("ball_radius", 0.2);
    if (!(cfg.ball_radius > 0.0)) throw ValidationError("run.ball_radius", "positive");
    cfg.stripe_y0 = run.number("stripe_y0", 0.0);
    cfg.stripe_amplitude = run.number("stripe_amplitude", 0.1);
    if (run.has("stripe_frequency")) {
        cfg.stripe_frequency = static_cast<int>(parse_int("run.stripe_frequency", run.get("stripe_frequency")));
        if (cfg.stripe_frequency < 1) throw ValidationError("run.stripe_frequency", "a positive integer");
    }
    if (run.has("init_file")) cfg.init_file = run.get("init_file");
    if (cfg.init == InitKind::FromFile && cfg.init_file.empty())
        throw ValidationError("run.init_file", "present when init = from_file");
    if (run.has("snapshot_every")) {
        cfg.snapshot_every = static_cast<int>(parse_int("run.snapshot_every", run.get("snapshot_every")));
        if (cfg.snapshot_every < 0) throw ValidationError("run.snapshot_every", "non-negative");
    }
    run.finish();

    return cfg;
}

inline SimConfig parse_config(const std::string& text) { return resolve_config(parse_document(text)); }

/// Serialize a resolved config; parse_config(print_config(cfg)) == cfg.
inline std::string print_config(const SimConfig& cfg) {
    using namespace cfgdetail;
    std::string out;
    out += "[mesh]\n";
    out += "x0 = " + fmt(cfg.domain.x0) + "\n";
    out += "x1 = " + fmt(cfg.domain.x1) + "\n";
    out += "y0 = " + fmt(cfg.domain.y0) + "\n";
    out += "y1 = " + fmt(cfg.domain.y1) + "\n";
    out += "nx = " + std::to_string(cfg.nx) + "\n";
    out += "ny = " + std::to_string(cfg.ny) + "\n";
    int full = 0;
    for (const TagRule& r : cfg.dirichlet_rules) {
        std::string key;
        if (r.tag == EdgeTag::DirichletFull) key = ++full == 1 ? "dirichlet" : "dirichlet2";
        else if (r.tag == EdgeTag::DirichletX) key = "dirichlet_x";
        else key = "dirichlet_y";
        out += key + " = " + fmt(r.segment) + "\n";
    }

    out += "\n[anisotropy]\n";
    switch (cfg.aniso.kind) {
        case AnisotropyKind::Isotropic:
            out += "kind = isotropic\n";
            break;
        case AnisotropyKind::ConvexOverhang:
            out += "kind = convex_overhang\nalpha = " + fmt(cfg.aniso.alpha) + "\n";
            break;
        case AnisotropyKind::RegularizedOverhang:
            out += "kind = regularized_overhang\nalpha = " + fmt(cfg.aniso.alpha) +
                   "\ndelta = " + fmt(cfg.aniso.delta) + "\n";
            break;
        case AnisotropyKind::NonConvexOverhang:
            out += "kind = nonconvex_overhang\nalpha = " + fmt(cfg.aniso.alpha) +
                   "\nlambda = " + fmt(cfg.aniso.lambda) + "\n";
            break;
    }

    out += "\n[elasticity]\n";
    out += "youngs_modulus = " + fmt(cfg.elasticity.youngs_modulus) + "\n";
    out += "poisson_ratio = " + fmt(cfg.elasticity.poisson_ratio) + "\n";
    out += "ersatz_factor = " + fmt(cfg.elasticity.ersatz_factor) + "\n";

    out += "\n[loads]\n";
    out += "body_force = " + fmt(cfg.loads.body_force) + "\n";
    if (!cfg.loads.pads.empty()) {
        out += "pad = " + fmt(cfg.loads.pads[0].segment) + "\n";
        out += "g = " + fmt(cfg.loads.pads[0].g) + "\n";
    }
    if (cfg.loads.pads.size() > 1) {
        out += "pad2 = " + fmt(cfg.loads.pads[1].segment) + "\n";
        out += "g2 = " + fmt(cfg.loads.pads[1].g) + "\n";
    }
    out += "g_scale = " + fmt(cfg.loads.g_scale) + "\n";
    out += std::string("enabled = ") + (cfg.loads_enabled ? "true" : "false") + "\n";

    out += "\n[phasefield]\n";
    out += "eps = " + fmt(cfg.eps) + "\n";
    out += "tau = " + fmt(cfg.tau) + "\n";
    out += "alpha_hat = " + fmt(cfg.alpha_hat) + "\n";
    out += "beta = " + fmt(cfg.beta) + "\n";
    out += "m = " + fmt(cfg.m) + "\n";
    out += "mass_tol = " + fmt(cfg.mass_tol_rel) + "\n";
    out += "steady_tol = " + fmt(cfg.steady_tol) + "\n";
    out += "inner_tol = " + fmt(cfg.inner_tol) + "\n";
    out += "picard_max = " + std::to_string(cfg.picard_max) + "\n";

    out += "\n[run]\n";
    out += "t_end = " + fmt(cfg.t_end) + "\n";
    out += "seed = " + std::to_string(cfg.seed) + "\n";
    switch (cfg.init) {
        case InitKind::Random: out += "init = random\n"; break;
        case InitKind::Ball: out += "init = ball\n"; break;
        case InitKind::Stripe: out += "init = stripe\n"; break;
        case InitKind::FromFile: out += "init = from_file\n"; break;
    }
    out += "ball_center = " + fmt(cfg.ball_center) + "\n";
    out += "ball_radius = " + fmt(cfg.ball_radius) + "\n";
    out += "stripe_y0 = " + fmt(cfg.stripe_y0) + "\n";
    out += "stripe_amplitude = " + fmt(cfg.stripe_amplitude) + "\n";
    out += "stripe_frequency = " + std::to_string(cfg.stripe_frequency) + "\n";
    if (!cfg.init_file.empty()) out += "init_file = " + cfg.init_file + "\n";
    out += "snapshot_every = " + std::to_string(cfg.snapshot_every) + "\n";
    return out;
}

}  // namespace atop
