// Copyright 2026 The Dualrail Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

// Time-domain-multiplexed continuous-variable cluster state simulator and
// verification pipeline. Sampled squeezed-light quadrature streams pass
// through an asymmetric interferometer and a modeled detection chain; the
// temporal-mode analysis certifies full inseparability of the resulting
// dual-rail state, cross-checked against an exact nullifier algebra.

#include "dualrail/common.hpp"
#include "dualrail/config.hpp"
#include "dualrail/detection.hpp"
#include "dualrail/fft.hpp"
#include "dualrail/io.hpp"
#include "dualrail/modes.hpp"
#include "dualrail/network.hpp"
#include "dualrail/nullifiers.hpp"
#include "dualrail/pipeline.hpp"
#include "dualrail/rng.hpp"
#include "dualrail/source.hpp"
#include "dualrail/trace.hpp"
#include "dualrail/witness.hpp"
