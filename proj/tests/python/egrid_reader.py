# SPDX-FileCopyrightText: Copyright (c) 2026 The elasto Authors. All rights reserved.
# SPDX-License-Identifier: Apache-2.0
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
# http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.

"""Reader for EGRID files and dataset manifests."""

import json
from pathlib import Path

import numpy as np


def read_egrid(path):
    """Returns (header dict, {name: float32 array of shape rows x cols})."""
    data = Path(path).read_bytes()
    end = data.index(b"\n")
    header = json.loads(data[:end].decode("utf-8"))
    if header.get("version") != 1 or header.get("dtype") != "f32le" or header.get("order") != "row-major":
        raise ValueError(f"{path}: unsupported EGRID header")
    rows, cols = header["shape"]
    names = header["arrays"]
    payload = np.frombuffer(data, dtype="<f4", offset=end + 1)
    if payload.size != len(names) * rows * cols:
        raise ValueError(f"{path}: payload has {payload.size} values, expected {len(names) * rows * cols}")
    arrays = {n: payload[k * rows * cols:(k + 1) * rows * cols].reshape(rows, cols) for k, n in enumerate(names)}
    return header, arrays


def read_manifest(root):
    root = Path(root)
    manifest = json.loads((root / "manifest.json").read_text())
    for entry in manifest["samples"]:
        entry["path"] = root / entry["file"]
    return manifest
