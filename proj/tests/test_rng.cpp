// Copyright 2026 The dmatrack Authors
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

#include <catch_amalgamated.hpp>

#include "dmatrack/rng.hpp"

using dmatrack::derive_seed;

TEST_CASE("derive_seed is deterministic and tag sensitive", "[rng]") {
  CHECK(derive_seed(7, "a", 0) == derive_seed(7, "a", 0));
  CHECK(derive_seed(7, "a", 0) != derive_seed(7, "b", 0));
  CHECK(derive_seed(7, "a", 0) != derive_seed(7, "a", 1));
  CHECK(derive_seed(7, "a", 0) != derive_seed(8, "a", 0));
}
