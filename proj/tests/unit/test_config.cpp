// SPDX-License-Identifier: Apache-2.0
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// ------------------------------------------------------------------------

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>

#include "doctest.h"
#include "helpers.hpp"
#include "radar_lab/config.hpp"
#include "radar_lab/errors.hpp"

using namespace radar_lab;
using namespace testing;
using nlohmann::json;

namespace {

json explicit_doc() {
    return json::parse(R"({
      "schema_version": 1,
      "name": "explicit",
      "waveform": {"bandwidth_hz": 8e6, "sample_rate_hz": 25e6, "n_samples": 128, "max_delay_samples": 12, "seed": 4},
      "scenario": {"a": [0.8, 0.6], "b": 2.0, "d": {"mag": 0.1, "phase_rad": 0.5}, "tau_samples": 3.4, "omega_bins": 0.37},
      "clutter": {"n_taps": 2, "coeffs": [[0.3, 0.1], 0.2]},
      "noise": {"sc_snr_db": 10, "rc_snr_db": null},
      "grid": {"tau_max_samples": 12},
      "campaign": {"n_trials": 5, "root_seed": 9}
    })");
}

}  // namespace

TEST_CASE("every preset parses at both scales") {
    for (const auto& name : preset_names())
        for (bool full : {false, true}) {
            const RunConfig rc = parse_config(preset_json(name, full));
            CHECK_NOTHROW(rc.campaign.validate());
        }
    CHECK_THROWS_AS(preset_json("nope"), ConfigError);
}

TEST_CASE("desk preset geometry resolves to a target inside the clutter range") {
    const RunConfig rc = parse_config(preset_json("desk"));
    const NodeScenario& sc = rc.campaign.scenario;
    const WaveformSpec& spec = sc.waveform_spec;
    CHECK(spec.n_samples == 4096);
    CHECK(sc.n_taps() == 16);
    const double tau = sc.target.tau / spec.dt();
    CHECK(tau > 0.0);
    CHECK(tau < sc.n_taps());
    CHECK(std::abs(sc.target.omega / spec.doppler_bin()) < 0.5);
    CHECK(std::norm(sc.b) / std::norm(sc.d) > 10.0);
    CHECK(rel_err(sc.clutter_power(), std::norm(sc.b) * 0.1) < 1e-12);
    REQUIRE(rc.geometry.has_value());
    const TargetState t = rc.target.value();
    CHECK(std::hypot(t.velocity.x(), t.velocity.y()) == doctest::Approx(250.0).epsilon(0.01));
}

TEST_CASE("explicit scenario config: amplitudes, units, null noise and defaults") {
    const RunConfig rc = parse_config(explicit_doc());
    const CampaignConfig& c = rc.campaign;
    CHECK(rc.name == "explicit");
    CHECK(c.scenario.a == cplx(0.8, 0.6));
    CHECK(c.scenario.b == cplx(2.0, 0.0));
    CHECK(std::abs(c.scenario.d - std::polar(0.1, 0.5)) < 1e-15);
    CHECK(c.scenario.clutter_coeffs.size() == 2);
    CHECK(c.scenario.clutter_coeffs[0] == cplx(0.3, 0.1));
    CHECK(c.scenario.target.tau == doctest::Approx(3.4 / 25e6));
    CHECK(c.scenario.target.omega == doctest::Approx(0.37 * c.scenario.waveform_spec.doppler_bin()));
    CHECK(std::isinf(c.rc_snr_db));
    CHECK(c.sc_snr_db == 10.0);
    CHECK(c.n_trials == 5);
    CHECK(c.root_seed == 9);
    CHECK(c.waveform_seed == 4);
    CHECK(c.variant == ErrorMapVariant::verbatim);

    json d = explicit_doc();
    d["scenario"].erase("tau_samples");
    d["scenario"]["tau_s"] = 1e-7;
    CHECK(parse_config(d).campaign.scenario.target.tau == 1e-7);
}

TEST_CASE("config errors are reported as ConfigError") {
    auto fails = [](auto edit) {
        json d = explicit_doc();
        edit(d);
        CHECK_THROWS_AS(parse_config(d), ConfigError);
    };
    fails([](json& d) { d["bogus"] = 1; });
    fails([](json& d) { d["waveform"]["sampel_rate_hz"] = 1; });
    fails([](json& d) { d["schema_version"] = 2; });
    fails([](json& d) { d["scenario"]["tau_s"] = 1e-7; });
    fails([](json& d) { d["scenario"].erase("tau_samples"); });
    fails([](json& d) { d["clutter"]["coeffs"] = {0.1}; });
    fails([](json& d) { d["waveform"]["n_samples"] = "many"; });
    fails([](json& d) { d["scenario"]["a"] = {1, 2, 3}; });
    fails([](json& d) { d["scenario"]["a"] = 0.0; });
    fails([](json& d) { d["scenario"]["tau_samples"] = 50.0; });
    fails([](json& d) { d["waveform"]["bandwidth_hz"] = 30e6; });
    fails([](json& d) { d["analysis"] = {{"error_map", "sideways"}}; });
    fails([](json& d) { d["campaign"]["sweep_axis"] = "up"; });
    fails([](json& d) { d["geometry"] = preset_json("desk")["geometry"]; });
    fails([](json& d) { d.erase("scenario"); });
    CHECK_THROWS_AS(parse_config(json::array()), ConfigError);
}

TEST_CASE("geometry problems surface as ConfigError") {
    json d = preset_json("desk");
    d["geometry"]["target"]["position"] = {0.0, 0.0};
    CHECK_THROWS_AS(parse_config(d), ConfigError);

    json g = preset_json("desk");
    const json node = {{"rn_position", {10000.0, 0.0}}, {"link", g["geometry"]["link"]}};
    g["geometry"] = {{"io_position", {0.0, 0.0}},
                     {"carrier_hz", 600e6},
                     {"target", g["geometry"]["target"]},
                     {"nodes", {node}}};
    CHECK_THROWS_AS(parse_config(g), ConfigError);
}

TEST_CASE("a manifest parses to the same campaign as its config") {
    const json doc = explicit_doc();
    const json manifest = {{"config", doc}, {"config_hash", config_hash(doc)}, {"tool", "radar_lab"}};
    const RunConfig a = parse_config(doc), b = parse_config(manifest);
    CHECK(a.resolved == b.resolved);
    CHECK(b.campaign.root_seed == 9);
}

TEST_CASE("config hash is stable and sensitive") {
    const json d = explicit_doc();
    CHECK(config_hash(d) == config_hash(explicit_doc()));
    CHECK(config_hash(d).size() == 16);
    json e = d;
    e["campaign"]["root_seed"] = 10;
    CHECK(config_hash(e) != config_hash(d));
}

TEST_CASE("clutter profile: power ratio, decay and determinism") {
    const cplx b{3.0, -1.0};
    const auto c = clutter_profile(b, 8, -10.0, 0.8, 5);
    REQUIRE(c.size() == 8);
    double p = 0.0;
    for (const auto& x : c) p += std::norm(x);
    CHECK(rel_err(p, std::norm(b) * 0.1) < 1e-12);
    for (std::size_t l = 1; l < c.size(); ++l) CHECK(rel_err(std::abs(c[l]) / std::abs(c[l - 1]), 0.8) < 1e-12);
    CHECK(clutter_profile(b, 8, -10.0, 0.8, 5) == c);
    CHECK(clutter_profile(b, 8, -10.0, 0.8, 6) != c);
    CHECK(clutter_profile(b, 0, -10.0, 0.8, 5).empty());
}

TEST_CASE("config files: round trip, missing file and malformed JSON") {
    const auto dir = std::filesystem::temp_directory_path() / "radar_lab_config_test";
    std::filesystem::create_directories(dir);
    const auto good = dir / "good.json";
    std::ofstream(good) << explicit_doc().dump(2);
    CHECK(load_config_file(good.string()).resolved == explicit_doc());
    const auto bad = dir / "bad.json";
    std::ofstream(bad) << "{\"schema_version\": 1,";
    CHECK_THROWS_AS(load_config_file(bad.string()), ConfigError);
    CHECK_THROWS_AS(load_config_file((dir / "absent.json").string()), ConfigError);
    std::filesystem::remove_all(dir);
}
