# SPDX-License-Identifier: Apache-2.0
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
# http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.
# ------------------------------------------------------------------------
"""Validates CLI outputs against the shipped JSON schemas."""

import csv
import json
import pathlib
import subprocess
import sys
import tempfile

import jsonschema
import referencing

cli, schema_dir = sys.argv[1], pathlib.Path(sys.argv[2])
schemas = {p.name: json.loads(p.read_text()) for p in schema_dir.glob("*.schema.json")}
registry = referencing.Registry().with_resources(
    (s["$id"], referencing.Resource.from_contents(s)) for s in schemas.values()
)
for name, s in schemas.items():
    registry = registry.with_resource(name, referencing.Resource.from_contents(s))


def validate(doc, name):
    jsonschema.Draft202012Validator(schemas[name], registry=registry).validate(doc)


def run(*args):
    return subprocess.run([cli, *args], check=True, capture_output=True, text=True).stdout


for preset in run("presets").split():
    for extra in ([], ["--full-scale"]):
        validate(json.loads(run("presets", preset, *extra)), "config.v1.schema.json")

with tempfile.TemporaryDirectory() as tmp:
    tmp = pathlib.Path(tmp)
    out = tmp / "a.json"
    run("analyze", "--preset", "tiny", "--out", str(out))
    validate(json.loads(out.read_text()), "analyze.v1.schema.json")
    validate(json.loads((tmp / "a.json.manifest.json").read_text()), "manifest.v1.schema.json")

    cfg = json.loads(run("presets", "tiny"))
    cfg["campaign"]["n_trials"] = 2
    (tmp / "c.json").write_text(json.dumps(cfg))
    run("montecarlo", "--config", str(tmp / "c.json"), "--out", str(tmp / "m.csv"))
    validate(json.loads((tmp / "m.csv.manifest.json").read_text()), "manifest.v1.schema.json")
    header = next(csv.reader((tmp / "m.csv").open()))
    assert header == ["sweep_db", "rmse_tau_s", "rmse_omega_rad_s", "sqrt_crb_tau", "sqrt_crb_omega",
                      "sqrt_total_tau", "sqrt_total_omega", "n_ok", "n_outlier"], header

    run("surface", "--preset", "tiny", "--out", str(tmp / "s.csv"))
    header = next(csv.reader((tmp / "s.csv").open()))
    assert header == ["tau_s", "omega_rad_s", "value", "masked"], header

print("schemas ok")
