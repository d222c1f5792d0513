#pragma once

#include <filesystem>
#include <span>
#include <vector>

#include <nlohmann/json.hpp>

#include "coevo/genome.hpp"
#include "coevo/objectives.hpp"

namespace coevo {

/// Minimization: a no worse everywhere and strictly better somewhere.
bool dominates(const ObjectiveVector& a, const ObjectiveVector& b);

struct ArchiveEntry {
    Genome genome;
    ObjectiveVector objectives;

    bool operator==(const ArchiveEntry&) const = default;
};

/// Mutually non-dominated entries, deduplicated by genome.
class ParetoArchive {
public:
    ParetoArchive() = default;

    /// Adds the entry unless it is dominated or its genome is present; evicts members it dominates.
    bool insert(const Genome& g, const ObjectiveVector& v);
    bool insert(const ArchiveEntry& e) { return insert(e.genome, e.objectives); }

    const std::vector<ArchiveEntry>& entries() const { return entries_; }
    std::size_t size() const { return entries_.size(); }
    bool empty() const { return entries_.empty(); }
    std::vector<ObjectiveVector> objectives() const;

    /// Entries ordered by (e_cv, c, e_pr, genome).
    std::vector<ArchiveEntry> sorted() const;

    static ParetoArchive from_entries(std::span<const ArchiveEntry> entries);

private:
    std::vector<ArchiveEntry> entries_;
};

/// Brute-force non-dominated filter; entries with equal genomes keep the first.
std::vector<ArchiveEntry> nondominated_filter(std::span<const ArchiveEntry> entries);

ParetoArchive merge_archives(std::span<const ParetoArchive> archives);

/// Exact 3-D hypervolume dominated by `points` and bounded by `reference`.
/// Throws ValidationError if any point exceeds the reference in some objective.
double hypervolume(std::span<const ObjectiveVector> points, const ObjectiveVector& reference);
double hypervolume(const ParetoArchive& archive, const ObjectiveVector& reference);

/// One JSON object per line: genome, objectives, and the decoded summary when `space` decodes it.
void write_archive_jsonl(const std::filesystem::path& path, const ParetoArchive& archive,
                         const SearchSpaceConfig* space = nullptr, const std::string& header = {});
ParetoArchive read_archive_jsonl(const std::filesystem::path& path);

}  // namespace coevo
