#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <string_view>

namespace tsv {

/// Frames carry a 4-byte big-endian payload length followed by the payload.
inline constexpr std::size_t kFrameHeaderSize = 4;
inline constexpr std::uint32_t kDefaultMaxFrame = 64u << 20;

std::array<unsigned char, kFrameHeaderSize> encode_frame_header(std::uint32_t length);
std::uint32_t decode_frame_header(const std::array<unsigned char, kFrameHeaderSize>& header);

/// Header plus payload. Throws std::length_error beyond 4 GiB.
std::string encode_frame(std::string_view payload);

}  // namespace tsv
