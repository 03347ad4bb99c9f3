#pragma once

#include <map>
#include <optional>
#include <string>

#include "qid/session.hpp"

namespace qid {

/// Flat key = value configuration; every key is mirrored by a CLI flag and
/// the CLI wins on conflict. Loading validates the assembled session
/// parameters and refuses to start on errors.
struct Config {
    Mode mode = Mode::QID;
    size_t n = 64;
    size_t m = 4;
    size_t ell = 16;
    double lambda = 0.05;
    double q = 0.0;
    double phi = 0.0;
    double eta = 0.0;
    double delta_tolerance = 0.0;
    uint64_t seed = 1;
    size_t sk_len = 0;
    double flip_prob = 0.0;
    double threshold = 0.0;
    size_t w = 1;
    std::string endpoint;      // host:port, empty = in memory
    std::string keystore;      // path, empty = derive from seed
    bool reveal = false;

    static Config from_file(const std::string& path);
    void apply(const std::string& key, const std::string& value);
    std::string describe() const;

    /// Session parameters with the standard basis code and syndrome family;
    /// throws std::invalid_argument listing the problems when unrunnable.
    SessionParams session_params() const;
};

/// Key store: the long-lived (w, k) pair plus any produced session keys.
struct KeyStore {
    size_t w = 1;
    std::optional<BitVec> mac_key;
    std::vector<BitVec> session_keys;

    static KeyStore load(const std::string& path);
    void save(const std::string& path) const;
    KeyMaterial material() const { return KeyMaterial{w, mac_key}; }
    uint64_t digest() const { return material().digest(); }
};

std::string bits_to_hex(const BitVec& v);
BitVec bits_from_hex(const std::string& hex, size_t nbits);

} // namespace qid
