// Copyright 2026 The steerq Authors.
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


/// Convenience header pulling in the whole library.

#pragma once

#include "steerq/circuit.hpp"
#include "steerq/errors.hpp"
#include "steerq/estimators.hpp"
#include "steerq/observables.hpp"
#include "steerq/oracles.hpp"
#include "steerq/parallel.hpp"
#include "steerq/rng.hpp"
#include "steerq/scaling.hpp"
#include "steerq/state_vector.hpp"
