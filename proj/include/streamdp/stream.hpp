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

#ifndef STREAMDP_STREAM_HPP
#define STREAMDP_STREAM_HPP

#include <algorithm>
#include <cmath>

#include <Eigen/Core>

#include "streamdp/errors.hpp"

namespace streamdp {

// One covariate-response pair. The streaming algorithms assume ||x|| <= 1
// and |y| <= 1; enforcement happens at ingestion.
struct StreamPoint {
  Eigen::VectorXd x;
  double y = 0.0;
};

enum class IngestPolicy {
  Reject,  // out-of-norm points raise InvalidInput
  Clip,    // rescale x into the unit ball, clamp y into [-1, 1]
};

// Validates (or normalizes) a point against the norm contract. Returns the
// point to feed downstream; `clipped`, when given, is set if the clip policy
// had to modify the point.
inline StreamPoint ingest_point(const StreamPoint& p, IngestPolicy policy,
                                bool* clipped = nullptr) {
  constexpr double kSlack = 1.0 + 1e-12;
  if (clipped != nullptr) *clipped = false;
  if (!p.x.allFinite() || !std::isfinite(p.y))
    throw InvalidInput("stream point: non-finite value");
  double xn = p.x.norm();
  if (xn <= kSlack && std::abs(p.y) <= kSlack) return p;
  if (policy == IngestPolicy::Reject)
    throw InvalidInput("stream point: norm bound violated (||x|| <= 1, |y| <= 1)");
  StreamPoint out = p;
  if (xn > 1.0) out.x /= xn;
  out.y = std::clamp(out.y, -1.0, 1.0);
  if (clipped != nullptr) *clipped = true;
  return out;
}

}  // namespace streamdp

#endif  // STREAMDP_STREAM_HPP
