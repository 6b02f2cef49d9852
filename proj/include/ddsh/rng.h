// Copyright 2026 The DDSH Authors.
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

#ifndef DDSH_RNG_H_
#define DDSH_RNG_H_

#include <cstdint>
#include <initializer_list>

namespace ddsh {

// SplitMix64 finalizer; used to derive independent stream seeds.
constexpr uint64_t MixBits(uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Seed for a sub-stream identified by `tags`, e.g. DeriveSeed(seed, {iter, epoch}).
constexpr uint64_t DeriveSeed(uint64_t seed, std::initializer_list<uint64_t> tags) {
  uint64_t s = MixBits(seed);
  for (const uint64_t t : tags) s = MixBits(s ^ MixBits(t + 0x632be59bd9b4e019ULL));
  return s;
}

}  // namespace ddsh

#endif  // DDSH_RNG_H_
