#pragma once

#include <cstddef>
#include <filesystem>
#include <span>
#include <string>

namespace kale {

/// Lowercase hex SHA-256 of raw bytes.
std::string sha256_hex(std::span<const std::byte> bytes);
std::string sha256_hex(const std::string& text);
std::string sha256_file(const std::filesystem::path& path);

/// Fetches `url` into `dest` unless `dest` already holds content with the
/// expected digest. The body goes to a temporary sibling file first and is
/// renamed into place only after the digest matches, so `dest` is never left
/// holding unverified bytes.
///
/// Throws IntegrityError on digest mismatch and TransferError on any network
/// or HTTP failure.
void download_file_by_url(const std::string& url, const std::filesystem::path& dest,
                          const std::string& sha256);

}  // namespace kale
