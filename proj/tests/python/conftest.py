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

import os
import subprocess
from pathlib import Path

import pytest


@pytest.fixture(scope="session")
def elasto_bin():
    path = os.environ.get("ELASTO_BIN")
    if not path or not Path(path).exists():
        pytest.skip("ELASTO_BIN does not point at the elasto executable")
    return Path(path)


@pytest.fixture(scope="session")
def run(elasto_bin):
    def _run(*args, check=True):
        proc = subprocess.run([str(elasto_bin), *map(str, args)], capture_output=True, text=True)
        if check and proc.returncode != 0:
            raise AssertionError(f"elasto {' '.join(map(str, args))} exited {proc.returncode}:\n{proc.stderr}")
        return proc
    return _run


@pytest.fixture(scope="session")
def small_dataset(run, tmp_path_factory):
    out = tmp_path_factory.mktemp("dataset")
    run("gen-dataset", "--seed", 7, "--train", 6, "--val", 2, "--test", 2, "--target-h", 0.003, "--out", out)
    return out
