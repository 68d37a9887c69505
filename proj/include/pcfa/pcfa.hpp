// Copyright 2026 The pcfa Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Convenience header pulling in the whole library.

#ifndef PCFA_PCFA_HPP
#define PCFA_PCFA_HPP

#include "pcfa/admm.hpp"
#include "pcfa/alm.hpp"
#include "pcfa/baselines.hpp"
#include "pcfa/core.hpp"
#include "pcfa/dataset.hpp"
#include "pcfa/dictionary.hpp"
#include "pcfa/error.hpp"
#include "pcfa/ksvd.hpp"
#include "pcfa/metrics.hpp"
#include "pcfa/mosaic.hpp"
#include "pcfa/omp.hpp"
#include "pcfa/parallel.hpp"
#include "pcfa/png_io.hpp"
#include "pcfa/random.hpp"
#include "pcfa/reproduce.hpp"
#include "pcfa/scene.hpp"
#include "pcfa/signals.hpp"

#endif  // PCFA_PCFA_HPP
