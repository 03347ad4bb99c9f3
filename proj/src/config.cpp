#include "qid/config.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace qid {

std::string bits_to_hex(const BitVec& v) {
    static const char* hex = "0123456789abcdef";
    std::string out;
    for (uint8_t b : v.packed()) {
        out += hex[b >> 4];
        out += hex[b & 0xF];
    }
    return out;
}

BitVec bits_from_hex(const std::string& hexstr, size_t nbits) {
    if (hexstr.size() % 2) throw std::invalid_argument("bits_from_hex: odd digit count");
    std::vector<uint8_t> bytes;
    auto nib = [](char c) -> unsigned {
        if (c >= '0' && c <= '9') return unsigned(c - '0');
        if (c >= 'a' && c <= 'f') return unsigned(c - 'a' + 10);
        if (c >= 'A' && c <= 'F') return unsigned(c - 'A' + 10);
        throw std::invalid_argument("bits_from_hex: bad digit");
    };
    for (size_t i = 0; i < hexstr.size(); i += 2)
        bytes.push_back(uint8_t((nib(hexstr[i]) << 4) | nib(hexstr[i + 1])));
    return BitVec::from_packed(bytes, nbits);
}

Config Config::from_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("config: cannot open " + path);
    Config cfg;
    std::string line;
    size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        auto eq = line.find('=');
        if (eq == std::string::npos) {
            bool blank = line.find_first_not_of(" \t\r") == std::string::npos;
            if (!blank)
                throw std::invalid_argument("config: bad line " + std::to_string(lineno));
            continue;
        }
        auto trim = [](std::string s) {
            size_t a = s.find_first_not_of(" \t\r");
            size_t b = s.find_last_not_of(" \t\r");
            return a == std::string::npos ? std::string() : s.substr(a, b - a + 1);
        };
        cfg.apply(trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
    }
    return cfg;
}

void Config::apply(const std::string& key, const std::string& value) {
    if (key == "mode") {
        auto m = mode_from_name(value);
        if (!m) throw std::invalid_argument("config: unknown mode " + value);
        mode = *m;
    } else if (key == "n") n = std::stoul(value);
    else if (key == "m") m = std::stoul(value);
    else if (key == "ell") ell = std::stoul(value);
    else if (key == "lambda") lambda = std::stod(value);
    else if (key == "q") q = std::stod(value);
    else if (key == "phi") phi = std::stod(value);
    else if (key == "eta") eta = std::stod(value);
    else if (key == "delta_tolerance") delta_tolerance = std::stod(value);
    else if (key == "seed") seed = std::stoull(value);
    else if (key == "sk_len") sk_len = std::stoul(value);
    else if (key == "flip_prob") flip_prob = std::stod(value);
    else if (key == "threshold") threshold = std::stod(value);
    else if (key == "w") w = std::stoul(value);
    else if (key == "endpoint") endpoint = value;
    else if (key == "keystore") keystore = value;
    else if (key == "reveal") reveal = value == "1" || value == "true";
    else throw std::invalid_argument("config: unknown key " + key);
}

std::string Config::describe() const {
    std::ostringstream os;
    os << "mode=" << mode_name(mode) << " n=" << n << " m=" << m << " ell=" << ell
       << " phi=" << phi << " eta=" << eta << " delta=" << delta_tolerance << " seed=" << seed;
    if (mode == Mode::QKD) os << " sk_len=" << sk_len;
    if (mode == Mode::MUTUAL) os << " flip_prob=" << flip_prob << " threshold=" << threshold;
    return os.str();
}

SessionParams Config::session_params() const {
    SessionParams p = make_params(mode, n, m, ell, seed, phi, eta, delta_tolerance);
    p.sk_len = sk_len;
    p.mutual_flip_prob = flip_prob;
    p.mutual_threshold = threshold;
    auto errs = p.validate();
    if (!errs.empty()) {
        std::string all = "configuration rejected:";
        for (const auto& e : errs) all += "\n  - " + e;
        throw std::invalid_argument(all);
    }
    if (w < 1 || w > m) throw std::invalid_argument("configuration rejected: w out of range");
    return p;
}

KeyStore KeyStore::load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("keystore: cannot open " + path);
    nlohmann::json j;
    in >> j;
    KeyStore ks;
    ks.w = j.at("w").get<size_t>();
    if (j.contains("mac_key_bits") && j.at("mac_key_bits").get<size_t>() > 0)
        ks.mac_key = bits_from_hex(j.at("mac_key").get<std::string>(),
                                   j.at("mac_key_bits").get<size_t>());
    if (j.contains("session_keys"))
        for (const auto& item : j.at("session_keys"))
            ks.session_keys.push_back(bits_from_hex(item.at("hex").get<std::string>(),
                                                    item.at("bits").get<size_t>()));
    return ks;
}

void KeyStore::save(const std::string& path) const {
    nlohmann::ordered_json j;
    j["w"] = w;
    j["mac_key_bits"] = mac_key ? mac_key->size() : 0;
    j["mac_key"] = mac_key ? bits_to_hex(*mac_key) : "";
    nlohmann::ordered_json keys = nlohmann::ordered_json::array();
    for (const auto& sk : session_keys)
        keys.push_back({{"bits", sk.size()}, {"hex", bits_to_hex(sk)}});
    j["session_keys"] = keys;
    std::ofstream out(path);
    if (!out) throw std::runtime_error("keystore: cannot write " + path);
    out << j.dump(2) << "\n";
}

} // namespace qid
