//
// Copyright 2026 The streamdp Authors
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
//

#ifndef STREAMDP_STREAMDP_HPP
#define STREAMDP_STREAMDP_HPP

#include "streamdp/dp.hpp"
#include "streamdp/errors.hpp"
#include "streamdp/geometry.hpp"
#include "streamdp/harness.hpp"
#include "streamdp/inc_erm.hpp"
#include "streamdp/inc_regression.hpp"
#include "streamdp/losses.hpp"
#include "streamdp/optimizer.hpp"
#include "streamdp/projected_regression.hpp"
#include "streamdp/rng.hpp"
#include "streamdp/stream.hpp"
#include "streamdp/tree_mechanism.hpp"

#endif  // STREAMDP_STREAMDP_HPP
