#include "kale/download.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <array>
#include <cctype>
#include <fstream>
#include <memory>

#define CPPHTTPLIB_OPENSSL_SUPPORT
#include "httplib.h"

#include "kale/errors.hpp"

namespace kale {

namespace {

class Sha256 {
public:
    Sha256() : ctx_(EVP_MD_CTX_new(), &EVP_MD_CTX_free) {
        if (!ctx_ || EVP_DigestInit_ex(ctx_.get(), EVP_sha256(), nullptr) != 1) {
            throw Error("SHA-256 initialisation failed");
        }
    }
    void update(const void* data, std::size_t n) { EVP_DigestUpdate(ctx_.get(), data, n); }
    std::string hex() {
        std::array<unsigned char, EVP_MAX_MD_SIZE> md{};
        unsigned int len = 0;
        EVP_DigestFinal_ex(ctx_.get(), md.data(), &len);
        static constexpr char digits[] = "0123456789abcdef";
        std::string out;
        out.reserve(2 * len);
        for (unsigned int i = 0; i < len; ++i) {
            out.push_back(digits[md[i] >> 4]);
            out.push_back(digits[md[i] & 0xF]);
        }
        return out;
    }

private:
    std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx_;
};

std::string lowercase(std::string s) {
    std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
    return s;
}

struct ParsedUrl {
    std::string origin;  // scheme://host[:port]
    std::string path;
};

ParsedUrl parse_url(const std::string& url) {
    const auto scheme_end = url.find("://");
    if (scheme_end == std::string::npos) throw TransferError("malformed URL: " + url);
    const auto scheme = lowercase(url.substr(0, scheme_end));
    if (scheme != "http" && scheme != "https") throw TransferError("unsupported URL scheme: " + scheme);
    const auto path_start = url.find('/', scheme_end + 3);
    if (path_start == std::string::npos) return {url, "/"};
    return {url.substr(0, path_start), url.substr(path_start)};
}

}  // namespace

std::string sha256_hex(std::span<const std::byte> bytes) {
    Sha256 h;
    h.update(bytes.data(), bytes.size());
    return h.hex();
}

std::string sha256_hex(const std::string& text) {
    return sha256_hex(std::as_bytes(std::span(text.data(), text.size())));
}

std::string sha256_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open for hashing: " + path.string());
    Sha256 h;
    std::array<char, 1 << 16> buf{};
    while (in) {
        in.read(buf.data(), buf.size());
        h.update(buf.data(), static_cast<std::size_t>(in.gcount()));
    }
    return h.hex();
}

void download_file_by_url(const std::string& url, const std::filesystem::path& dest,
                          const std::string& sha256) {
    namespace fs = std::filesystem;
    const auto expected = lowercase(sha256);
    if (fs::is_regular_file(dest) && sha256_file(dest) == expected) return;

    const auto [origin, path] = parse_url(url);
    fs::path tmp = dest;
    tmp += ".part";

    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw IoError("cannot create temporary file: " + tmp.string());

        httplib::Client client(origin);
        client.set_follow_location(true);
        client.set_connection_timeout(30);
        client.set_read_timeout(120);
        int status = 0;
        auto res = client.Get(
            path,
            [&](const httplib::Response& r) {
                status = r.status;
                return r.status == 200;
            },
            [&](const char* data, std::size_t n) {
                out.write(data, static_cast<std::streamsize>(n));
                return static_cast<bool>(out);
            });
        if (!res || status != 200) {
            out.close();
            fs::remove(tmp);
            if (status != 0 && status != 200) {
                throw TransferError("download of " + url + " failed with HTTP status " + std::to_string(status));
            }
            throw TransferError("download of " + url + " failed: " + httplib::to_string(res.error()));
        }
    }

    const auto actual = sha256_file(tmp);
    if (actual != expected) {
        fs::remove(tmp);
        throw IntegrityError("digest mismatch for " + url + ": expected " + expected + ", got " + actual);
    }
    fs::rename(tmp, dest);
}

}  // namespace kale
