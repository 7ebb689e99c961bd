#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>
#include <string_view>

namespace hbo {

using Rng = std::mt19937_64;

/// Builds an independent generator from a master seed and a key path, so
/// that e.g. (seed, snapshot, run) streams never overlap or shift when
/// neighbouring runs are added.
Rng make_stream(std::uint64_t master_seed, std::initializer_list<std::uint64_t> keys);

/// 64-bit FNV-1a, used to key streams by snapshot id and to fingerprint data.
std::uint64_t fnv1a(std::string_view bytes, std::uint64_t h = 0xcbf29ce484222325ULL);

/// Stream keys for the named generators.
namespace stream {
inline constexpr std::uint64_t kThetaProposal = 1;
inline constexpr std::uint64_t kEtaProposal = 2;
inline constexpr std::uint64_t kAccept = 3;
inline constexpr std::uint64_t kPriorDraw = 4;
inline constexpr std::uint64_t kBoInit = 5;
inline constexpr std::uint64_t kBaseline = 6;
inline constexpr std::uint64_t kSynthetic = 7;
}  // namespace stream

}  // namespace hbo
