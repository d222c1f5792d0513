#pragma once

#include <compare>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "coevo/neural.hpp"
#include "coevo/rng.hpp"

namespace coevo {

struct SearchSpaceConfig {
    int n_features = 68;
    int n_layers = 2;
    int n_bits = 8;

    /// Largest encodable layer size, 2^(n_bits-1) - 1.
    int s_max() const { return (1 << (n_bits - 1)) - 1; }
    std::size_t topology_bits() const { return static_cast<std::size_t>(n_layers * n_bits); }
    std::size_t length() const { return static_cast<std::size_t>(n_features) + topology_bits(); }

    void validate() const;
    nlohmann::json to_json() const;
    static SearchSpaceConfig from_json(const nlohmann::json& j);
};

/// Fixed-length bitstring: feature bits first, then one n_bits tuple per layer.
struct Genome {
    std::vector<std::uint8_t> bits;

    Genome() = default;
    explicit Genome(std::size_t n) : bits(n, 0) {}
    explicit Genome(std::vector<std::uint8_t> b) : bits(std::move(b)) {}

    std::size_t size() const { return bits.size(); }
    std::string to_string() const;
    static Genome from_string(std::string_view s);

    bool operator==(const Genome&) const = default;
    std::strong_ordering operator<=>(const Genome& other) const { return bits <=> other.bits; }
};

struct GenomeHash {
    std::size_t operator()(const Genome& g) const;
};

/// Feature subset plus hidden topology.
struct Architecture {
    std::vector<std::size_t> features;  // 0-based catalog indices, ascending
    Topology topology;

    bool operator==(const Architecture&) const = default;
    nlohmann::json to_json() const;
    static Architecture from_json(const nlohmann::json& j);
    /// e.g. "|X|=11 [18 sigmoid]".
    std::string summary() const;
};

class EmptyFeatureSetError : public ValidationError {
public:
    using ValidationError::ValidationError;
};

/// Layer tuples from topology bits only (length n_layers * n_bits).
Topology decode_topology(std::span<const std::uint8_t> bits, const SearchSpaceConfig& cfg);
std::vector<std::uint8_t> encode_topology(const Topology& topology, const SearchSpaceConfig& cfg);

/// Throws EmptyFeatureSetError when no feature bit is set.
Architecture decode(const Genome& g, const SearchSpaceConfig& cfg);
Genome encode(const Architecture& a, const SearchSpaceConfig& cfg);

/// Averaged-size complexity in [0, 1]; 1 only for the full architecture.
double complexity(std::size_t feature_count, const Topology& topology, const SearchSpaceConfig& cfg);
double complexity(const Architecture& a, const SearchSpaceConfig& cfg);

/// Sets one random feature bit when the feature prefix is empty. Returns true if it changed g.
bool repair(Genome& g, const SearchSpaceConfig& cfg, Rng& rng);
Genome random_genome(const SearchSpaceConfig& cfg, Rng& rng);

}  // namespace coevo
