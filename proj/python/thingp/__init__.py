# Copyright 2026 The thingp Authors
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#     http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.

"""Thinned Gaussian-process approximations for autocorrelated data."""

from ._thingp import *  # noqa: F401,F403
from ._thingp import ConfigError, DataError, Error, NumericalError

__version__ = "0.1.0"


def fit_predict_sv(train, test_x, test_t=None, T=None, m=30, m_p=140, seed=1, max_iter=100):
    """Fits scaled Vecchia on round-robin blocks and predicts at test_x.

    T defaults to the PACF choice, capped so every block holds at least m + 1
    records.
    """
    import numpy as np

    if T is None:
        T = min(select_thinning_number(train).T, max_thinning_for(train.n, m))
    cfg = VecchiaConfig()
    cfg.m, cfg.m_p, cfg.seed, cfg.max_iter = m, m_p, seed, max_iter
    model, _ = fit_vecchia(train, partition(train.n, T), cfg)
    if test_t is None:
        test_t = np.zeros(len(test_x))
    return predict_vecchia(model, train, test_x, test_t, m_p, seed)
