// Command-line front end: calibrate, scan, rabi, stability, convert.
#include <CLI11.hpp>

#include <charconv>
#include <filesystem>
#include <iostream>
#include <optional>

#include "oner/records.hpp"
#include "oner/units.hpp"

using namespace oner;
namespace fs = std::filesystem;

namespace {

enum Exit { kOk = 0, kInput = 1, kNumerical = 2, kPartial = 3 };

struct Common {
    std::string config;
    std::string out;
    std::string format;
    std::string preset;
    std::optional<double> field_gauss, rabi_mhz, angle_deg;
    std::vector<std::string> transitions;
};

void add_common(CLI::App* app, Common& c) {
    app->add_option("--config", c.config, "YAML run configuration")->check(CLI::ExistingFile);
    app->add_option("--out", c.out, "output file (multi-file CSV output uses it as a prefix)");
    app->add_option("--format", c.format, "json or csv")->check(CLI::IsMember({"json", "csv"}));
    app->add_option("--preset", c.preset, "3000G, 1000G or 1500G");
    app->add_option("--field-gauss", c.field_gauss, "magnetic field in G");
    app->add_option("--rabi-mhz", c.rabi_mhz, "peak electronic Rabi frequency / 2pi in MHz");
    app->add_option("--angle-deg", c.angle_deg, "polarization angle in deg");
    app->add_option("--transition", c.transitions, "transition such as -9/2:-7/2, or all (repeatable)");
}

std::string number_text(double v) {
    char buf[64];
    auto r = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, r.ptr);
}

RunConfig resolve(const Common& c) {
    ConfigOverrides ov;
    if (!c.preset.empty()) ov["preset"] = c.preset;
    if (c.field_gauss) ov["field"] = number_text(*c.field_gauss) + " G";
    if (c.rabi_mhz) ov["rabi"] = number_text(*c.rabi_mhz) + " MHz";
    if (c.angle_deg) ov["angle"] = number_text(*c.angle_deg) + " deg";
    if (!c.format.empty()) ov["output.format"] = c.format;
    if (!c.transitions.empty()) {
        std::string seq = "[";
        for (std::size_t i = 0; i < c.transitions.size(); ++i) seq += (i ? ", '" : "'") + c.transitions[i] + "'";
        ov["transitions"] = seq + "]";
    }
    return parse_config(c.config.empty() ? std::string() : read_text(c.config), ov);
}

std::string output_path(const Common& c, const RunConfig& cfg, const std::string& kind) {
    if (!c.out.empty()) return c.out;
    fs::create_directories(cfg.output.path);
    return (fs::path(cfg.output.path) / (kind + "." + cfg.output.format)).string();
}

std::string with_suffix(const std::string& base, const std::string& label, const std::string& ext) {
    fs::path p(base);
    fs::path stem = p.parent_path() / p.stem();
    return stem.string() + "_" + label + "." + ext;
}

std::string file_label(const Transition& t) {
    std::string s = "mI" + half_integer_str(t.two_mI);
    for (char& ch : s)
        if (ch == '/') ch = '_';
    return s;
}

}  // namespace

namespace {

int status_of(std::size_t ok, std::size_t total) {
    if (total == 0 || ok == 0) return kNumerical;
    return ok == total ? kOk : kPartial;
}

int cmd_calibrate(const Common& c) {
    const RunConfig cfg = resolve(c);
    const CalibrationTable table = run_calibrate(cfg);
    std::cout << format_calibration_table(table);
    const std::string out = output_path(c, cfg, "calibration");
    if (cfg.output.format == "csv")
        write_text(out, calibration_csv(table));
    else
        write_text(out, make_record("calibration", cfg, to_json(table)).dump(2) + "\n");
    std::cerr << "wrote " << out << "\n";
    std::size_t ok = 0;
    for (const auto& r : table.rows) ok += r.ok;
    return status_of(ok, table.rows.size());
}

int cmd_scan(const Common& c) {
    const RunConfig cfg = resolve(c);
    const std::vector<ScanResult> scans = run_scan(cfg);
    const std::string out = output_path(c, cfg, "scan");
    std::size_t ok = 0;
    json curves = json::array();
    for (const auto& s : scans) {
        std::cout << s.transition.str() << ": " << s.status;
        for (const auto& p : s.curve.peaks) std::cout << "  [T " << p.T * 1e3 << " ns, P " << p.P << "]";
        std::cout << "\n";
        ok += s.ok;
        if (cfg.output.format == "csv") {
            if (!s.curve.periods.empty()) write_text(with_suffix(out, file_label(s.transition), "csv"), scan_csv(s.curve));
        } else {
            json j = s.curve.periods.empty() ? json{{"transition", s.transition.str()}} : to_json(s.curve);
            j["status"] = s.status;
            curves.push_back(j);
        }
    }
    if (cfg.output.format == "json") write_text(out, make_record("scan", cfg, {{"curves", curves}}).dump(2) + "\n");
    std::cerr << "wrote " << (cfg.output.format == "csv" ? with_suffix(out, "<transition>", "csv") : out) << "\n";
    return status_of(ok, scans.size());
}

std::optional<CalibrationTable> load_calibration(const std::string& path) {
    if (path.empty()) return std::nullopt;
    const ResultRecord rec = parse_record(read_text(path));
    if (rec.kind != "calibration") throw std::invalid_argument(path + ": expected a calibration record, got " + rec.kind);
    return calibration_from_json(rec.payload);
}

int cmd_rabi(const Common& c, const std::string& calibration_path) {
    const RunConfig cfg = resolve(c);
    const auto cal = load_calibration(calibration_path);
    const std::vector<RabiResult> runs = run_rabi(cfg, cal ? &*cal : nullptr);
    const std::string out = output_path(c, cfg, "rabi");
    const AtomSpec atom = cfg.atom_spec();
    std::size_t ok = 0;
    json items = json::array();
    for (const auto& r : runs) {
        std::cout << r.transition.str() << ": " << r.status;
        if (r.ok)
            std::cout << "  P " << r.P << ", Omega_N/2pi " << r.estimate.Omega_N / kKHz << " kHz, N_sc "
                      << r.scattering.N_sc;
        std::cout << "\n";
        ok += r.ok;
        if (!r.ok) {
            items.push_back({{"transition", r.transition.str()}, {"status", r.status}});
            continue;
        }
        if (cfg.output.format == "csv") write_text(with_suffix(out, file_label(r.transition), "csv"), trajectory_csv(r.trajectory, atom));
        items.push_back({{"transition", r.transition.str()},
                         {"status", r.status},
                         {"P", r.P},
                         {"trajectory", to_json(r.trajectory, atom)},
                         {"rabi", to_json(r.estimate)},
                         {"scattering", to_json(r.scattering)}});
    }
    if (cfg.output.format == "json") write_text(out, make_record("rabi", cfg, {{"runs", items}}).dump(2) + "\n");
    return status_of(ok, runs.size());
}

int cmd_stability(const Common& c, const std::string& calibration_path) {
    const RunConfig cfg = resolve(c);
    auto cal = load_calibration(calibration_path);
    if (!cal) {
        std::cerr << "no --calibration given; calibrating first\n";
        cal = run_calibrate(cfg);
    }
    const StabilityResult res = run_stability(cfg, *cal);
    for (const auto& t : res.missing) std::cout << t.str() << ": no calibrated operating point\n";
    json payload = json::object();
    std::string csv;
    if (res.aggregate) {
        std::cout << "minimum over transitions\n" << format_tolerance_table(*res.aggregate);
        payload["aggregate"] = to_json(*res.aggregate);
        csv += tolerance_csv(*res.aggregate);
    }
    if (res.per_transition) {
        std::cout << "per transition\n" << format_tolerance_table(*res.per_transition);
        payload["per_transition"] = to_json(*res.per_transition);
        std::string body = tolerance_csv(*res.per_transition);
        csv += csv.empty() ? body : body.substr(body.find('\n') + 1);
    }
    json missing = json::array();
    for (const auto& t : res.missing) missing.push_back(t.str());
    payload["missing"] = missing;
    const std::string out = output_path(c, cfg, "stability");
    write_text(out, cfg.output.format == "csv" ? csv : make_record("stability", cfg, payload).dump(2) + "\n");
    if (!res.aggregate && !res.per_transition) return kNumerical;
    return res.complete() ? kOk : kPartial;
}

struct ConvertArgs {
    std::string rabi, intensity, power, noise, waist;
};

int cmd_convert(const Common& c, const ConvertArgs& a) {
    const RunConfig cfg = resolve(c);
    PhotometrySpec spec = cfg.photometry_spec();
    if (!a.waist.empty()) spec.waist = parse_quantity(a.waist, Dimension::length);
    json payload = {{"waist_um", spec.waist * 1e6}, {"dipole_C_m", spec.dipole_si()}};
    bool any = false;
    auto report = [&](double Omega, double I) {
        const double P = beam_power(I, spec.waist);
        std::cout << "Omega/2pi " << Omega / kMHz << " MHz  <->  I " << I * 1e-4 << " W/cm2  <->  P " << P * 1e3
                  << " mW at w0 " << spec.waist * 1e6 << " um\n";
        payload["conversions"].push_back({{"rabi_MHz", Omega / kMHz}, {"intensity_W_cm2", I * 1e-4}, {"power_mW", P * 1e3}});
        any = true;
    };
    if (c.rabi_mhz) {
        const double Om = *c.rabi_mhz * kMHz;
        report(Om, rabi_to_intensity(Om, spec));
    }
    if (!a.rabi.empty()) {
        const double Om = parse_quantity(a.rabi, Dimension::frequency);
        report(Om, rabi_to_intensity(Om, spec));
    }
    if (!a.intensity.empty()) {
        const double I = parse_quantity(a.intensity, Dimension::intensity);
        report(intensity_to_rabi(I, spec), I);
    }
    if (!a.power.empty()) {
        const double I = peak_intensity(parse_quantity(a.power, Dimension::power), spec.waist);
        report(intensity_to_rabi(I, spec), I);
    }
    if (!a.noise.empty()) {
        const double rel = parse_quantity(a.noise, Dimension::ratio);
        const double r = intensity_noise_to_rabi_noise(rel);
        std::cout << "intensity noise " << rel * 100 << " %  ->  Rabi noise " << r * 100 << " %\n";
        payload["noise"] = {{"intensity_percent", rel * 100}, {"rabi_percent", r * 100}};
        any = true;
    }
    if (!any) throw std::invalid_argument("convert: give --rabi, --rabi-mhz, --intensity, --power or --intensity-noise");
    if (!c.out.empty()) write_text(c.out, make_record("conversion", cfg, payload).dump(2) + "\n");
    return kOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Amplitude-modulated optical control of the 87Sr nuclear spin: calibration, scans, stability"};
    app.require_subcommand(1);

    Common cal_c, scan_c, rabi_c, stab_c, conv_c;
    std::string rabi_cal, stab_cal;
    ConvertArgs conv;

    auto* cal = app.add_subcommand("calibrate", "midpoint detuning, period scan and first peak per transition");
    add_common(cal, cal_c);
    auto* scan = app.add_subcommand("scan", "flip probability versus modulation period");
    add_common(scan, scan_c);
    auto* rabi = app.add_subcommand("rabi", "full trajectories at an operating point");
    add_common(rabi, rabi_c);
    rabi->add_option("--calibration", rabi_cal, "calibration record (JSON) providing T and Delta")->check(CLI::ExistingFile);
    auto* stab = app.add_subcommand("stability", "tolerance thresholds under quasi-static perturbations");
    add_common(stab, stab_c);
    stab->add_option("--calibration", stab_cal, "calibration record (JSON); calibrates first when omitted")
        ->check(CLI::ExistingFile);
    auto* conv_app = app.add_subcommand("convert", "Rabi frequency, intensity and beam power conversions");
    add_common(conv_app, conv_c);
    conv_app->add_option("--rabi", conv.rabi, "Rabi frequency with unit, e.g. '30 MHz'");
    conv_app->add_option("--intensity", conv.intensity, "peak intensity with unit, e.g. '1 W/cm2'");
    conv_app->add_option("--power", conv.power, "beam power with unit, e.g. '2 mW'");
    conv_app->add_option("--intensity-noise", conv.noise, "relative intensity noise, e.g. '0.5 %'");
    conv_app->add_option("--waist", conv.waist, "beam waist with unit, e.g. '50 um'");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kOk : kInput;
    }

    try {
        if (*cal) return cmd_calibrate(cal_c);
        if (*scan) return cmd_scan(scan_c);
        if (*rabi) return cmd_rabi(rabi_c, rabi_cal);
        if (*stab) return cmd_stability(stab_c, stab_cal);
        if (*conv_app) return cmd_convert(conv_c, conv);
    } catch (const IntegrationError& e) {
        std::cerr << "numerical failure at t = " << e.time << " us: " << e.what() << "\n";
        return kNumerical;
    } catch (const RegimeError& e) {
        std::cerr << "numerical failure: " << e.what() << "\n";
        return kNumerical;
    } catch (const IoError& e) {
        std::cerr << "I/O error: " << e.what() << "\n";
        return kInput;
    } catch (const std::invalid_argument& e) {
        std::cerr << "input error: " << e.what() << "\n";
        return kInput;
    } catch (const fs::filesystem_error& e) {
        std::cerr << "I/O error: " << e.what() << "\n";
        return kInput;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kNumerical;
    }
    return kOk;
}
