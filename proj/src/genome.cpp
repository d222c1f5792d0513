#include "coevo/genome.hpp"

#include <sstream>

#include "coevo/error.hpp"

namespace coevo {

void SearchSpaceConfig::validate() const {
    if (n_features < 1) throw ValidationError("search space needs at least one feature");
    if (n_layers < 0) throw ValidationError("layer count must be non-negative");
    if (n_bits < 2 || n_bits > 16) throw ValidationError("bits per layer must be within [2, 16]");
}

nlohmann::json SearchSpaceConfig::to_json() const {
    return {{"n_features", n_features}, {"n_layers", n_layers}, {"n_bits", n_bits}};
}

SearchSpaceConfig SearchSpaceConfig::from_json(const nlohmann::json& j) {
    SearchSpaceConfig c;
    c.n_features = j.value("n_features", c.n_features);
    c.n_layers = j.value("n_layers", c.n_layers);
    c.n_bits = j.value("n_bits", c.n_bits);
    c.validate();
    return c;
}

std::string Genome::to_string() const {
    std::string s(bits.size(), '0');
    for (std::size_t i = 0; i < bits.size(); ++i) {
        if (bits[i]) s[i] = '1';
    }
    return s;
}

Genome Genome::from_string(std::string_view s) {
    Genome g(s.size());
    for (std::size_t i = 0; i < s.size(); ++i) {
        if (s[i] == '1') {
            g.bits[i] = 1;
        } else if (s[i] != '0') {
            throw ParseError("genome string may only contain 0 and 1");
        }
    }
    return g;
}

std::size_t GenomeHash::operator()(const Genome& g) const {
    std::uint64_t h = mix64(g.bits.size());
    std::uint64_t word = 0;
    for (std::size_t i = 0; i < g.bits.size(); ++i) {
        word = (word << 1) | (g.bits[i] & 1u);
        if (i % 64 == 63) {
            h = hash_combine(h, word);
            word = 0;
        }
    }
    return static_cast<std::size_t>(hash_combine(h, word));
}

nlohmann::json Architecture::to_json() const {
    nlohmann::json layers = nlohmann::json::array();
    for (const auto& l : topology.layers) layers.push_back({{"size", l.size}, {"activation", to_string(l.activation)}});
    return {{"features", features}, {"layers", layers}};
}

Architecture Architecture::from_json(const nlohmann::json& j) {
    Architecture a;
    a.features = j.at("features").get<std::vector<std::size_t>>();
    for (const auto& l : j.at("layers")) {
        a.topology.layers.push_back({l.at("size").get<int>(), activation_from_string(l.at("activation"))});
    }
    return a;
}

std::string Architecture::summary() const {
    std::ostringstream os;
    os << "|X|=" << features.size() << " [";
    bool first = true;
    for (const auto& l : topology.active()) {
        if (!first) os << ", ";
        os << l.size << ' ' << to_string(l.activation);
        first = false;
    }
    os << "]";
    return os.str();
}

Topology decode_topology(std::span<const std::uint8_t> bits, const SearchSpaceConfig& cfg) {
    if (bits.size() != cfg.topology_bits()) throw ValidationError("topology bit count mismatch");
    Topology t;
    const auto nb = static_cast<std::size_t>(cfg.n_bits);
    for (int k = 0; k < cfg.n_layers; ++k) {
        const auto tuple = bits.subspan(static_cast<std::size_t>(k) * nb, nb);
        int size = 0;
        for (std::size_t p = 0; p + 1 < nb; ++p) size = (size << 1) | (tuple[p] & 1);
        HiddenLayer layer;
        layer.size = size;
        layer.activation = tuple[nb - 1] ? Activation::Sigmoid : Activation::Tanh;
        t.layers.push_back(layer);
    }
    return t;
}

std::vector<std::uint8_t> encode_topology(const Topology& topology, const SearchSpaceConfig& cfg) {
    if (topology.layers.size() > static_cast<std::size_t>(cfg.n_layers)) {
        throw ValidationError("topology has more layers than the search space allows");
    }
    const auto nb = static_cast<std::size_t>(cfg.n_bits);
    std::vector<std::uint8_t> bits(cfg.topology_bits(), 0);
    for (std::size_t k = 0; k < topology.layers.size(); ++k) {
        const auto& l = topology.layers[k];
        if (l.size < 0 || l.size > cfg.s_max()) {
            throw ValidationError("layer size " + std::to_string(l.size) + " outside [0, " +
                                  std::to_string(cfg.s_max()) + "]");
        }
        for (std::size_t p = 0; p + 1 < nb; ++p) {
            bits[k * nb + p] = static_cast<std::uint8_t>((l.size >> (nb - 2 - p)) & 1);
        }
        bits[k * nb + nb - 1] = l.activation == Activation::Sigmoid ? 1 : 0;
    }
    return bits;
}

Architecture decode(const Genome& g, const SearchSpaceConfig& cfg) {
    if (g.size() != cfg.length()) {
        throw ValidationError("genome has " + std::to_string(g.size()) + " bits, expected " +
                              std::to_string(cfg.length()));
    }
    Architecture a;
    const auto nf = static_cast<std::size_t>(cfg.n_features);
    for (std::size_t j = 0; j < nf; ++j) {
        if (g.bits[j]) a.features.push_back(j);
    }
    if (a.features.empty()) throw EmptyFeatureSetError("genome selects no features");
    a.topology = decode_topology(std::span(g.bits).subspan(nf), cfg);
    return a;
}

Genome encode(const Architecture& a, const SearchSpaceConfig& cfg) {
    if (a.features.empty()) throw EmptyFeatureSetError("architecture selects no features");
    Genome g(cfg.length());
    for (auto f : a.features) {
        if (f >= static_cast<std::size_t>(cfg.n_features)) {
            throw ValidationError("feature index " + std::to_string(f) + " outside the catalog");
        }
        g.bits[f] = 1;
    }
    const auto topo = encode_topology(a.topology, cfg);
    std::copy(topo.begin(), topo.end(), g.bits.begin() + cfg.n_features);
    return g;
}

double complexity(std::size_t feature_count, const Topology& topology, const SearchSpaceConfig& cfg) {
    const double features = static_cast<double>(feature_count) / cfg.n_features;
    int active = 0;
    double size_sum = 0.0;
    for (const auto& l : topology.layers) {
        if (l.size > 0) {
            ++active;
            size_sum += static_cast<double>(l.size) / cfg.s_max();
        }
    }
    const double layers = cfg.n_layers > 0 ? static_cast<double>(active) / cfg.n_layers : 0.0;
    const double sizes = active > 0 ? size_sum / active : 0.0;
    return (features + layers + sizes) / 3.0;
}

double complexity(const Architecture& a, const SearchSpaceConfig& cfg) {
    return complexity(a.features.size(), a.topology, cfg);
}

bool repair(Genome& g, const SearchSpaceConfig& cfg, Rng& rng) {
    const auto nf = static_cast<std::size_t>(cfg.n_features);
    for (std::size_t j = 0; j < nf && j < g.size(); ++j) {
        if (g.bits[j]) return false;
    }
    g.bits[rng.below(nf)] = 1;
    return true;
}

Genome random_genome(const SearchSpaceConfig& cfg, Rng& rng) {
    Genome g(cfg.length());
    for (auto& b : g.bits) b = static_cast<std::uint8_t>(rng.next() >> 63);
    repair(g, cfg, rng);
    return g;
}

}  // namespace coevo
