#pragma once

#include <string>
#include <string_view>

namespace tsv {

/// gzip container (RFC 1952) around `data`.
std::string gzip_compress(std::string_view data);
/// Inverse of gzip_compress. Throws Error on corrupt input.
std::string gzip_decompress(std::string_view data);

}  // namespace tsv
