#include "tsv/framing.hpp"

#include <limits>
#include <stdexcept>

namespace tsv {

std::array<unsigned char, kFrameHeaderSize> encode_frame_header(std::uint32_t length) {
  return {static_cast<unsigned char>(length >> 24), static_cast<unsigned char>(length >> 16),
          static_cast<unsigned char>(length >> 8), static_cast<unsigned char>(length)};
}

std::uint32_t decode_frame_header(const std::array<unsigned char, kFrameHeaderSize>& h) {
  return (std::uint32_t{h[0]} << 24) | (std::uint32_t{h[1]} << 16) | (std::uint32_t{h[2]} << 8) |
         std::uint32_t{h[3]};
}

std::string encode_frame(std::string_view payload) {
  if (payload.size() > std::numeric_limits<std::uint32_t>::max()) {
    throw std::length_error("frame payload exceeds 4 GiB");
  }
  const auto header = encode_frame_header(static_cast<std::uint32_t>(payload.size()));
  std::string out;
  out.reserve(kFrameHeaderSize + payload.size());
  out.append(reinterpret_cast<const char*>(header.data()), header.size());
  out.append(payload);
  return out;
}

}  // namespace tsv
