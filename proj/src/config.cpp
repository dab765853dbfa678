#include "oner/config.hpp"

#include <yaml-cpp/yaml.h>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "oner/units.hpp"

namespace oner {

const std::vector<Preset>& presets() {
    static const std::vector<Preset> p = {
        {"3000G", 3000.0, 30.0, 60.0},
        {"1000G", 1000.0, 15.0, 75.0},
        {"1500G", 1500.0, 20.0, 75.0},
    };
    return p;
}

const Preset& find_preset(const std::string& name) {
    for (const auto& p : presets())
        if (p.name == name) return p;
    throw ConfigError("preset", "unknown preset '" + name + "' (expected 3000G, 1000G or 1500G)");
}

namespace {

std::string join(const std::string& base, const std::string& key) { return base.empty() ? key : base + "." + key; }

class Section {
public:
    Section(YAML::Node node, std::string path) : node_(std::move(node)), path_(std::move(path)) {
        if (node_ && !node_.IsNull() && !node_.IsMap()) throw ConfigError(path_, "expected a mapping");
    }

    void allow(std::initializer_list<const char*> keys) const {
        if (!node_ || !node_.IsMap()) return;
        std::set<std::string> ok(keys.begin(), keys.end());
        for (const auto& kv : node_) {
            const std::string k = kv.first.as<std::string>();
            if (!ok.count(k)) throw ConfigError(join(path_, k), "unknown key");
        }
    }

    bool has(const char* key) const { return node_ && node_.IsMap() && node_[key] && !node_[key].IsNull(); }
    YAML::Node get(const char* key) const { return node_[key]; }
    std::string path(const char* key) const { return join(path_, key); }
    Section child(const char* key) const { return Section(has(key) ? node_[key] : YAML::Node(), path(key)); }

    std::string scalar(const char* key) const {
        const YAML::Node n = node_[key];
        if (!n.IsScalar()) throw ConfigError(path(key), "expected a scalar value");
        return n.Scalar();
    }

    void quantity(const char* key, Dimension d, double& out) const {
        if (!has(key)) return;
        try {
            out = parse_canonical(scalar(key), d);
        } catch (const UnitError& e) {
            throw ConfigError(path(key), e.what());
        }
    }

    void number(const char* key, double& out) const {
        if (!has(key)) return;
        out = to_number(scalar(key), path(key));
    }

    void integer(const char* key, int& out) const {
        if (!has(key)) return;
        const double v = to_number(scalar(key), path(key));
        if (v != std::floor(v) || std::abs(v) > 1e9) throw ConfigError(path(key), "expected an integer");
        out = static_cast<int>(v);
    }

    void text(const char* key, std::string& out) const {
        if (has(key)) out = scalar(key);
    }

    void boolean(const char* key, bool& out) const {
        if (!has(key)) return;
        const std::string s = scalar(key);
        if (s == "true" || s == "yes" || s == "on")
            out = true;
        else if (s == "false" || s == "no" || s == "off")
            out = false;
        else
            throw ConfigError(path(key), "expected true or false, got '" + s + "'");
    }

    std::vector<std::string> list(const char* key) const {
        const YAML::Node n = node_[key];
        std::vector<std::string> out;
        if (n.IsScalar()) {
            out.push_back(n.Scalar());
        } else if (n.IsSequence()) {
            for (const auto& item : n) {
                if (!item.IsScalar()) throw ConfigError(path(key), "expected a list of scalars");
                out.push_back(item.Scalar());
            }
        } else {
            throw ConfigError(path(key), "expected a scalar or a list");
        }
        return out;
    }

    static double to_number(const std::string& s, const std::string& path) {
        std::istringstream is(s);
        double v;
        if (!(is >> v)) throw ConfigError(path, "expected a number, got '" + s + "'");
        std::string rest;
        is >> rest;
        if (!rest.empty()) throw ConfigError(path, "expected a plain number, got '" + s + "'");
        if (!std::isfinite(v)) throw ConfigError(path, "value must be finite");
        return v;
    }

private:
    YAML::Node node_;
    std::string path_;
};

void require(bool ok, const std::string& path, const std::string& what) {
    if (!ok) throw ConfigError(path, what);
}

const Preset* matching_preset(double field, double rabi, double angle) {
    for (const auto& p : presets())
        if (p.field == field && p.rabi == rabi && p.angle == angle) return &p;
    return nullptr;
}

// Defaults that follow the field: the lower-field presets have their first
// peaks at longer periods and capped tolerance searches.
void field_defaults(RunConfig& c) {
    if (c.field < 2500.0) {
        c.scan.stop = 2.5;
        c.stability.layout = "per-transition";
        c.stability.T = 0.040;
        c.stability.B = 1.0;
        c.stability.Omega = 0.8;
        c.stability.theta = 10.0;
        c.stability.Delta = 5.0;
    }
}

void apply_overrides(YAML::Node& root, const ConfigOverrides& overrides) {
    for (const auto& [key, value] : overrides) {
        std::vector<std::string> parts;
        std::stringstream ss(key);
        for (std::string p; std::getline(ss, p, '.');) parts.push_back(p);
        if (parts.empty()) continue;
        // rebuild the chain explicitly; yaml-cpp nodes alias on assignment
        std::vector<YAML::Node> chain{root};
        for (std::size_t i = 0; i + 1 < parts.size(); ++i) {
            YAML::Node next = chain.back()[parts[i]];
            if (!next || next.IsNull()) {
                chain.back()[parts[i]] = YAML::Node(YAML::NodeType::Map);
                next = chain.back()[parts[i]];
            }
            if (!next.IsMap()) throw ConfigError(key, "cannot override inside a non-mapping value");
            chain.push_back(next);
        }
        // flow lists ("[a, b]") are parsed, everything else stays a scalar
        if (!value.empty() && value.front() == '[') {
            try {
                chain.back()[parts.back()] = YAML::Load(value);
            } catch (const YAML::Exception& e) {
                throw ConfigError(key, std::string("invalid list: ") + e.what());
            }
        } else {
            chain.back()[parts.back()] = value;
        }
    }
}

}  // namespace

RunConfig parse_config(const std::string& text, const ConfigOverrides& overrides) {
    YAML::Node root;
    try {
        root = YAML::Load(text);
    } catch (const YAML::Exception& e) {
        throw ConfigError("", std::string("invalid YAML: ") + e.what());
    }
    if (!root || root.IsNull()) root = YAML::Node(YAML::NodeType::Map);
    if (!root.IsMap()) throw ConfigError("", "top level must be a mapping");
    apply_overrides(root, overrides);

    const Section top(root, "");
    top.allow({"preset", "field", "rabi", "angle", "detuning", "period", "duration", "transitions", "atom", "scan",
               "integrator", "stability", "photometry", "output"});

    RunConfig c;
    bool named_preset = false;
    if (top.has("preset")) {
        const Preset& p = find_preset(top.scalar("preset"));
        c.preset = p.name;
        c.field = p.field;
        c.rabi = p.rabi;
        c.angle = p.angle;
        named_preset = true;
    }
    top.quantity("field", Dimension::field, c.field);
    top.quantity("rabi", Dimension::frequency, c.rabi);
    top.quantity("angle", Dimension::angle, c.angle);
    require(c.field > 0.0, top.path("field"), "must be > 0");
    require(c.rabi > 0.0, top.path("rabi"), "must be > 0");
    require(c.angle >= 0.0 && c.angle <= 180.0, top.path("angle"), "must lie in [0, 180] deg");
    if (!named_preset) {
        const Preset* p = matching_preset(c.field, c.rabi, c.angle);
        c.preset = p ? p->name : "custom";
    }
    field_defaults(c);

    if (top.has("detuning")) {
        if (top.scalar("detuning") == "auto") {
            c.detuning.reset();
        } else {
            double d = 0.0;
            top.quantity("detuning", Dimension::frequency, d);
            c.detuning = d;
        }
    }
    top.quantity("period", Dimension::time, c.period);
    top.quantity("duration", Dimension::time, c.duration);
    require(c.period > 0.0, top.path("period"), "must be > 0");
    require(c.duration > 0.0, top.path("duration"), "must be > 0");

    if (top.has("transitions")) {
        const auto items = top.list("transitions");
        c.all_transitions = items.size() == 1 && items[0] == "all";
        c.transitions.clear();
        if (!c.all_transitions) {
            for (const auto& s : items) {
                try {
                    c.transitions.push_back(Transition::parse(s));
                } catch (const std::exception& e) {
                    throw ConfigError(top.path("transitions"), e.what());
                }
            }
            std::sort(c.transitions.begin(), c.transitions.end());
            c.transitions.erase(std::unique(c.transitions.begin(), c.transitions.end()), c.transitions.end());
            require(!c.transitions.empty(), top.path("transitions"), "empty selection");
        }
    }

    const Section atom = top.child("atom");
    atom.allow({"gJ", "gI", "hyperfine_A", "hyperfine_Q", "decay_rate", "wavelength"});
    atom.number("gJ", c.atom.gJ);
    atom.number("gI", c.atom.gI);
    atom.quantity("hyperfine_A", Dimension::frequency, c.atom.A);
    atom.quantity("hyperfine_Q", Dimension::frequency, c.atom.Q);
    atom.quantity("decay_rate", Dimension::frequency, c.atom.Gamma);
    atom.quantity("wavelength", Dimension::length, c.atom.wavelength);
    require(c.atom.Gamma >= 0.0, atom.path("decay_rate"), "must be >= 0");
    require(c.atom.wavelength > 0.0, atom.path("wavelength"), "must be > 0");

    const Section scan = top.child("scan");
    scan.allow({"start", "stop", "step", "resolution", "mode", "record_threshold", "screen_threshold", "fidelity_floor"});
    scan.quantity("start", Dimension::time, c.scan.start);
    scan.quantity("stop", Dimension::time, c.scan.stop);
    scan.quantity("step", Dimension::time, c.scan.step);
    scan.quantity("resolution", Dimension::time, c.scan.resolution);
    scan.text("mode", c.scan.mode);
    scan.number("record_threshold", c.scan.record_threshold);
    scan.number("screen_threshold", c.scan.screen_threshold);
    scan.number("fidelity_floor", c.scan.fidelity_floor);
    require(c.scan.start > 0.0, scan.path("start"), "must be > 0");
    require(c.scan.stop >= c.scan.start, scan.path("stop"), "must be >= scan.start");
    require(c.scan.step > 0.0, scan.path("step"), "must be > 0");
    require((c.scan.stop - c.scan.start) / c.scan.step <= 1e6, scan.path("step"), "grid has too many points");
    require(c.scan.resolution > 0.0, scan.path("resolution"), "must be > 0");
    require(c.scan.mode == "hybrid" || c.scan.mode == "exact", scan.path("mode"), "expected hybrid or exact");
    for (auto [k, v] : {std::pair{"record_threshold", c.scan.record_threshold},
                        std::pair{"screen_threshold", c.scan.screen_threshold},
                        std::pair{"fidelity_floor", c.scan.fidelity_floor}})
        require(v >= 0.0 && v <= 1.0, scan.path(k), "must lie in [0, 1]");

    const Section integ = top.child("integrator");
    integ.allow({"method", "slices_per_period", "slices_per_sample", "rtol", "atol", "threads"});
    integ.text("method", c.integrator.method);
    integ.integer("slices_per_period", c.integrator.slices_per_period);
    integ.integer("slices_per_sample", c.integrator.slices_per_sample);
    integ.number("rtol", c.integrator.rtol);
    integ.number("atol", c.integrator.atol);
    integ.integer("threads", c.integrator.threads);
    require(c.integrator.method == "magnus4" || c.integrator.method == "rk45", integ.path("method"),
            "expected magnus4 or rk45");
    require(c.integrator.slices_per_period >= 8, integ.path("slices_per_period"), "must be >= 8");
    require(c.integrator.slices_per_sample >= 1, integ.path("slices_per_sample"), "must be >= 1");
    require(c.integrator.rtol > 0.0, integ.path("rtol"), "must be > 0");
    require(c.integrator.atol > 0.0, integ.path("atol"), "must be > 0");
    require(c.integrator.threads >= 0, integ.path("threads"), "must be >= 0");

    const Section stab = top.child("stability");
    stab.allow({"targets", "parameters", "layout", "prefilter", "bounds"});
    if (stab.has("targets")) {
        c.stability.targets.clear();
        for (const auto& s : stab.list("targets")) {
            const double v = Section::to_number(s, stab.path("targets"));
            require(v > 0.0 && v < 1.0, stab.path("targets"), "targets must lie in (0, 1)");
            c.stability.targets.push_back(v);
        }
        std::sort(c.stability.targets.begin(), c.stability.targets.end());
        c.stability.targets.erase(std::unique(c.stability.targets.begin(), c.stability.targets.end()),
                                  c.stability.targets.end());
    }
    if (stab.has("parameters")) {
        c.stability.parameters.clear();
        for (const auto& s : stab.list("parameters")) {
            try {
                c.stability.parameters.push_back(parse_parameter(s));
            } catch (const std::exception& e) {
                throw ConfigError(stab.path("parameters"), e.what());
            }
        }
        std::sort(c.stability.parameters.begin(), c.stability.parameters.end());
        c.stability.parameters.erase(std::unique(c.stability.parameters.begin(), c.stability.parameters.end()),
                                     c.stability.parameters.end());
    }
    stab.text("layout", c.stability.layout);
    require(c.stability.layout == "aggregate" || c.stability.layout == "per-transition" || c.stability.layout == "both",
            stab.path("layout"), "expected aggregate, per-transition or both");
    stab.boolean("prefilter", c.stability.prefilter);
    const Section bounds = stab.child("bounds");
    bounds.allow({"T", "B", "Omega", "theta", "Delta"});
    bounds.quantity("T", Dimension::time, c.stability.T);
    bounds.quantity("B", Dimension::field, c.stability.B);
    bounds.quantity("Omega", Dimension::frequency, c.stability.Omega);
    bounds.quantity("theta", Dimension::angle, c.stability.theta);
    bounds.quantity("Delta", Dimension::frequency, c.stability.Delta);
    for (auto [k, v] : {std::pair{"T", c.stability.T}, std::pair{"B", c.stability.B}, std::pair{"Omega", c.stability.Omega},
                        std::pair{"theta", c.stability.theta}, std::pair{"Delta", c.stability.Delta}})
        require(v > 0.0, bounds.path(k), "must be > 0");

    const Section phot = top.child("photometry");
    phot.allow({"waist"});
    phot.quantity("waist", Dimension::length, c.photometry.waist);
    require(c.photometry.waist > 0.0, phot.path("waist"), "must be > 0");

    const Section out = top.child("output");
    out.allow({"path", "format"});
    out.text("path", c.output.path);
    out.text("format", c.output.format);
    require(c.output.format == "json" || c.output.format == "csv", out.path("format"), "expected json or csv");
    require(!c.output.path.empty(), out.path("path"), "must not be empty");
    return c;
}

RunConfig load_config(const std::string& path, const ConfigOverrides& overrides) {
    std::ifstream in(path);
    if (!in) throw ConfigError("", "cannot read config file '" + path + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str(), overrides);
}

std::string emit_config(const RunConfig& c) {
    auto num = [](double v) {
        char buf[64];
        auto r = std::to_chars(buf, buf + sizeof buf, v);
        return std::string(buf, r.ptr);
    };
    YAML::Emitter e;
    e << YAML::BeginMap;
    e << YAML::Key << "preset" << YAML::Value << c.preset;
    e << YAML::Key << "field" << YAML::Value << format_canonical(c.field, Dimension::field);
    e << YAML::Key << "rabi" << YAML::Value << format_canonical(c.rabi, Dimension::frequency);
    e << YAML::Key << "angle" << YAML::Value << format_canonical(c.angle, Dimension::angle);
    e << YAML::Key << "detuning" << YAML::Value
      << (c.detuning ? format_canonical(*c.detuning, Dimension::frequency) : std::string("auto"));
    e << YAML::Key << "period" << YAML::Value << format_canonical(c.period, Dimension::time);
    e << YAML::Key << "duration" << YAML::Value << format_canonical(c.duration, Dimension::time);
    e << YAML::Key << "transitions" << YAML::Value;
    if (c.all_transitions) {
        e << "all";
    } else {
        e << YAML::Flow << YAML::BeginSeq;
        for (const auto& t : c.transitions) e << t.str();
        e << YAML::EndSeq;
    }

    e << YAML::Key << "atom" << YAML::Value << YAML::BeginMap;
    e << YAML::Key << "gJ" << YAML::Value << num(c.atom.gJ);
    e << YAML::Key << "gI" << YAML::Value << num(c.atom.gI);
    e << YAML::Key << "hyperfine_A" << YAML::Value << format_canonical(c.atom.A, Dimension::frequency);
    e << YAML::Key << "hyperfine_Q" << YAML::Value << format_canonical(c.atom.Q, Dimension::frequency);
    e << YAML::Key << "decay_rate" << YAML::Value << format_canonical(c.atom.Gamma, Dimension::frequency);
    e << YAML::Key << "wavelength" << YAML::Value << format_canonical(c.atom.wavelength, Dimension::length);
    e << YAML::EndMap;

    e << YAML::Key << "scan" << YAML::Value << YAML::BeginMap;
    e << YAML::Key << "start" << YAML::Value << format_canonical(c.scan.start, Dimension::time);
    e << YAML::Key << "stop" << YAML::Value << format_canonical(c.scan.stop, Dimension::time);
    e << YAML::Key << "step" << YAML::Value << format_canonical(c.scan.step, Dimension::time);
    e << YAML::Key << "resolution" << YAML::Value << format_canonical(c.scan.resolution, Dimension::time);
    e << YAML::Key << "mode" << YAML::Value << c.scan.mode;
    e << YAML::Key << "record_threshold" << YAML::Value << num(c.scan.record_threshold);
    e << YAML::Key << "screen_threshold" << YAML::Value << num(c.scan.screen_threshold);
    e << YAML::Key << "fidelity_floor" << YAML::Value << num(c.scan.fidelity_floor);
    e << YAML::EndMap;

    e << YAML::Key << "integrator" << YAML::Value << YAML::BeginMap;
    e << YAML::Key << "method" << YAML::Value << c.integrator.method;
    e << YAML::Key << "slices_per_period" << YAML::Value << c.integrator.slices_per_period;
    e << YAML::Key << "slices_per_sample" << YAML::Value << c.integrator.slices_per_sample;
    e << YAML::Key << "rtol" << YAML::Value << num(c.integrator.rtol);
    e << YAML::Key << "atol" << YAML::Value << num(c.integrator.atol);
    e << YAML::Key << "threads" << YAML::Value << c.integrator.threads;
    e << YAML::EndMap;

    e << YAML::Key << "stability" << YAML::Value << YAML::BeginMap;
    e << YAML::Key << "targets" << YAML::Value << YAML::Flow << YAML::BeginSeq;
    for (double t : c.stability.targets) e << num(t);
    e << YAML::EndSeq;
    e << YAML::Key << "parameters" << YAML::Value << YAML::Flow << YAML::BeginSeq;
    for (Parameter p : c.stability.parameters) e << to_string(p);
    e << YAML::EndSeq;
    e << YAML::Key << "layout" << YAML::Value << c.stability.layout;
    e << YAML::Key << "prefilter" << YAML::Value << (c.stability.prefilter ? "true" : "false");
    e << YAML::Key << "bounds" << YAML::Value << YAML::BeginMap;
    e << YAML::Key << "T" << YAML::Value << format_canonical(c.stability.T, Dimension::time);
    e << YAML::Key << "B" << YAML::Value << format_canonical(c.stability.B, Dimension::field);
    e << YAML::Key << "Omega" << YAML::Value << format_canonical(c.stability.Omega, Dimension::frequency);
    e << YAML::Key << "theta" << YAML::Value << format_canonical(c.stability.theta, Dimension::angle);
    e << YAML::Key << "Delta" << YAML::Value << format_canonical(c.stability.Delta, Dimension::frequency);
    e << YAML::EndMap << YAML::EndMap;

    e << YAML::Key << "photometry" << YAML::Value << YAML::BeginMap;
    e << YAML::Key << "waist" << YAML::Value << format_canonical(c.photometry.waist, Dimension::length);
    e << YAML::EndMap;

    e << YAML::Key << "output" << YAML::Value << YAML::BeginMap;
    e << YAML::Key << "path" << YAML::Value << c.output.path;
    e << YAML::Key << "format" << YAML::Value << c.output.format;
    e << YAML::EndMap;
    e << YAML::EndMap;
    return std::string(e.c_str()) + "\n";
}

AtomSpec RunConfig::atom_spec() const {
    AtomSpec a;
    a.gJ = atom.gJ;
    a.gI = atom.gI;
    a.A = canonical_to_internal(atom.A, Dimension::frequency);
    a.Q = canonical_to_internal(atom.Q, Dimension::frequency);
    a.Gamma = canonical_to_internal(atom.Gamma, Dimension::frequency);
    a.lambda0_nm = atom.wavelength * 1e3;
    a.validate();
    return a;
}

DriveParams RunConfig::drive() const {
    DriveParams d;
    d.B = field;
    d.Omega0 = canonical_to_internal(rabi, Dimension::frequency);
    d.theta = canonical_to_internal(angle, Dimension::angle);
    d.Delta = detuning ? canonical_to_internal(*detuning, Dimension::frequency) : 0.0;
    d.T = period;
    d.tau = duration;
    return d;
}

DriveParams RunConfig::drive_for(const Transition& tr) const {
    DriveParams d = drive();
    if (!detuning) d.Delta = select_detuning(atom_spec(), d.B, tr);
    return d;
}

std::vector<Transition> RunConfig::selected() const { return all_transitions ? Transition::all() : transitions; }

TGrid RunConfig::grid() const { return {scan.start, scan.stop, scan.step}; }

EvolveOptions RunConfig::evolve_options() const {
    EvolveOptions o;
    o.method = integrator.method == "rk45" ? Method::adaptive_rk45 : Method::magnus4;
    o.min_slices_per_period = integrator.slices_per_period;
    o.slices_per_sample = integrator.slices_per_sample;
    o.rtol = integrator.rtol;
    o.atol = integrator.atol;
    return o;
}

ScanOptions RunConfig::scan_options() const {
    ScanOptions s;
    s.mode = scan.mode == "exact" ? ScanMode::exact : ScanMode::hybrid;
    s.record_threshold = scan.record_threshold;
    s.screen_threshold = scan.screen_threshold;
    s.resolution = scan.resolution;
    s.threads = static_cast<unsigned>(integrator.threads);
    s.evolve = evolve_options();
    return s;
}

StabilityOptions RunConfig::stability_options() const {
    StabilityOptions s;
    s.evolve = evolve_options();
    s.threads = static_cast<unsigned>(integrator.threads);
    s.pure_prefilter = stability.prefilter;
    return s;
}

ToleranceRequest RunConfig::tolerance_request() const {
    ToleranceRequest r;
    r.parameters = stability.parameters;
    r.targets = stability.targets;
    r.bounds.T = canonical_to_internal(stability.T, Dimension::time);
    r.bounds.B = canonical_to_internal(stability.B, Dimension::field);
    r.bounds.Omega = canonical_to_internal(stability.Omega, Dimension::frequency);
    r.bounds.theta = canonical_to_internal(stability.theta, Dimension::angle);
    r.bounds.Delta = canonical_to_internal(stability.Delta, Dimension::frequency);
    return r;
}

PhotometrySpec RunConfig::photometry_spec() const {
    PhotometrySpec p;
    p.waist = canonical_to_internal(photometry.waist, Dimension::length);
    p.wavelength = atom.wavelength * 1e-6;
    return p;
}

}  // namespace oner
