// Copyright 2026 The coopadmm Authors
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

#ifndef COOPADMM_COOPADMM_HPP
#define COOPADMM_COOPADMM_HPP

/// @file
/// @brief Everything.

#include "coopadmm/admm.hpp"
#include "coopadmm/bench.hpp"
#include "coopadmm/dynamics.hpp"
#include "coopadmm/output.hpp"
#include "coopadmm/parallel.hpp"
#include "coopadmm/qp.hpp"
#include "coopadmm/reference.hpp"
#include "coopadmm/scenario.hpp"
#include "coopadmm/scenario_io.hpp"
#include "coopadmm/simulation.hpp"
#include "coopadmm/subproblems.hpp"
#include "coopadmm/types.hpp"

#endif  // COOPADMM_COOPADMM_HPP
