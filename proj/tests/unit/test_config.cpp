#include <doctest.h>

#include <cmath>

#include "oner/config.hpp"
#include "oner/units.hpp"

using namespace oner;

namespace {

std::string error_key(const std::string& text, const ConfigOverrides& o = {}) {
    try {
        parse_config(text, o);
    } catch (const ConfigError& e) {
        return e.key;
    }
    return "<accepted>";
}

}  // namespace

TEST_CASE("quantities carry units and convert to internal units") {
    CHECK(parse_quantity("3000 gauss", Dimension::field) == 3000.0);
    CHECK(parse_quantity("0.3 T", Dimension::field) == doctest::Approx(3000.0));
    CHECK(parse_quantity("500 ns", Dimension::time) == doctest::Approx(0.5));
    CHECK(parse_quantity("0.5us", Dimension::time) == 0.5);
    CHECK(parse_quantity("30 MHz", Dimension::frequency) == doctest::Approx(kMHz * 30.0));
    CHECK(parse_quantity("60 deg", Dimension::angle) == doctest::Approx(M_PI / 3));
    CHECK(parse_quantity("2.5 %", Dimension::ratio) == doctest::Approx(0.025));
    CHECK(parse_quantity("50 um", Dimension::length) == doctest::Approx(50e-6));
    CHECK(parse_quantity("1 W/cm2", Dimension::intensity) == doctest::Approx(1e4));
    CHECK_THROWS_AS(parse_quantity("0.5", Dimension::time), UnitError);
    CHECK_THROWS_AS(parse_quantity("0.5 G", Dimension::time), UnitError);
    CHECK_THROWS_AS(parse_quantity("fast", Dimension::time), UnitError);
    CHECK_THROWS_AS(parse_quantity("1 parsec", Dimension::length), UnitError);
    for (double v : {0.1, 1.0 / 3.0, 517.0e-3, 7.48e-3}) {
        CHECK(parse_canonical(format_canonical(v, Dimension::time), Dimension::time) == v);
        CHECK(internal_to_canonical(canonical_to_internal(v, Dimension::frequency), Dimension::frequency) ==
              doctest::Approx(v).epsilon(1e-15));
    }
}

TEST_CASE("an empty document selects the default preset") {
    const RunConfig c = parse_config("");
    CHECK(c.preset == "3000G");
    CHECK(c.field == 3000.0);
    CHECK(c.rabi == 30.0);
    CHECK(c.angle == 60.0);
    CHECK(c.all_transitions);
    CHECK(c.selected().size() == 9);
    const DriveParams d = c.drive();
    CHECK(d.Omega0 == doctest::Approx(kMHz * 30.0));
    CHECK(d.theta == doctest::Approx(M_PI / 3));
    CHECK(d.tau == 50.0);
    CHECK(c.evolve_options().min_slices_per_period == 512);
}

TEST_CASE("lower-field documents map to their presets and field defaults") {
    const RunConfig a = parse_config("field: 1000 G\nrabi: 15 MHz\nangle: 75 deg\n");
    CHECK(a.preset == "1000G");
    CHECK(a.scan.stop == 2.5);
    CHECK(a.stability.layout == "per-transition");
    const RunConfig b = parse_config("preset: 1500G\n");
    CHECK(b.field == 1500.0);
    CHECK(b.rabi == 20.0);
    CHECK(b.angle == 75.0);
    CHECK(parse_config("field: 2000 G\n").preset == "custom");
    CHECK(error_key("preset: 2000G\n") == "preset");
}

TEST_CASE("invalid documents are rejected with the offending key") {
    CHECK(error_key("field: 3000 gauss\nperiod: 0.5\n") == "period");
    CHECK(error_key("scan:\n  stepp: 2 ns\n") == "scan.stepp");
    CHECK(error_key("colour: red\n") == "colour");
    CHECK(error_key("integrator:\n  method: euler\n") == "integrator.method");
    CHECK(error_key("transitions: [\"+9/2:+11/2\"]\n") == "transitions");
    CHECK(error_key("stability:\n  bounds:\n    T: -1 ns\n") == "stability.bounds.T");
    CHECK(error_key("stability:\n  parameters: [T, X]\n") == "stability.parameters");
    CHECK(error_key("angle: 200 deg\n") == "angle");
    CHECK(error_key("[1, 2]\n") == "");
    CHECK_THROWS_AS(load_config("/nonexistent/run.yaml"), ConfigError);
}

TEST_CASE("emitted configuration parses back to the same values") {
    const RunConfig c = parse_config(
        "preset: 1000G\n"
        "detuning: 1234.5678901 MHz\n"
        "transitions: [\"-9/2<->-7/2\", \"+1/2:+3/2\"]\n"
        "scan: {start: 333 ns, step: 1.7 ns, mode: exact}\n"
        "stability: {targets: [0.999, 0.99, 0.95], parameters: [theta, T], layout: both}\n"
        "photometry: {waist: 37 um}\n"
        "output: {path: out/run1, format: csv}\n");
    const RunConfig back = parse_config(emit_config(c));
    CHECK(back == c);
    CHECK(back.transitions.size() == 2);
    CHECK(back.stability.targets == std::vector<double>{0.95, 0.99, 0.999});
    REQUIRE(back.detuning.has_value());
    CHECK(back.drive_for(Transition{-9}).Delta == doctest::Approx(kMHz * 1234.5678901));
    CHECK(parse_config(emit_config(RunConfig{})) == RunConfig{});
}

TEST_CASE("dotted overrides apply on top of the document") {
    const RunConfig c = parse_config("field: 3000 G\n", {{"rabi", "20 MHz"}, {"scan.step", "4 ns"}, {"transitions", "[\"-1/2:+1/2\"]"}});
    CHECK(c.rabi == 20.0);
    CHECK(c.scan.step == doctest::Approx(0.004));
    REQUIRE(c.selected().size() == 1);
    CHECK(c.selected()[0] == Transition{-1});
    CHECK(c.preset == "custom");
    CHECK(error_key("", {{"scan.bogus", "1"}}) == "scan.bogus");
    CHECK(error_key("", {{"field", "3000"}}) == "field");
}

TEST_CASE("resolved accessors use the midpoint detuning per transition") {
    const RunConfig c = parse_config("");
    const AtomSpec atom = c.atom_spec();
    for (const Transition& tr : c.selected())
        CHECK(c.drive_for(tr).Delta == doctest::Approx(select_detuning(atom, c.field, tr)).epsilon(1e-14));
    const ToleranceRequest r = c.tolerance_request();
    CHECK(r.targets == std::vector<double>{0.99, 0.999});
    CHECK(r.bounds.T == doctest::Approx(0.006));
    CHECK(c.photometry_spec().waist == doctest::Approx(50e-6));
    CHECK(c.grid().values().size() == 651);
}
