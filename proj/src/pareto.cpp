#include "coevo/pareto.hpp"

#include <algorithm>
#include <fstream>

#include "coevo/error.hpp"

namespace coevo {

bool dominates(const ObjectiveVector& a, const ObjectiveVector& b) {
    bool strictly = false;
    for (std::size_t i = 0; i < kObjectives; ++i) {
        if (a[i] > b[i]) return false;
        if (a[i] < b[i]) strictly = true;
    }
    return strictly;
}

bool ParetoArchive::insert(const Genome& g, const ObjectiveVector& v) {
    for (const auto& e : entries_) {
        if (e.genome == g || dominates(e.objectives, v)) return false;
    }
    std::erase_if(entries_, [&](const ArchiveEntry& e) { return dominates(v, e.objectives); });
    entries_.push_back({g, v});
    return true;
}

std::vector<ObjectiveVector> ParetoArchive::objectives() const {
    std::vector<ObjectiveVector> out;
    out.reserve(entries_.size());
    for (const auto& e : entries_) out.push_back(e.objectives);
    return out;
}

std::vector<ArchiveEntry> ParetoArchive::sorted() const {
    auto out = entries_;
    std::sort(out.begin(), out.end(), [](const ArchiveEntry& a, const ArchiveEntry& b) {
        const auto x = a.objectives.as_array(), y = b.objectives.as_array();
        if (x != y) return x < y;
        return a.genome < b.genome;
    });
    return out;
}

ParetoArchive ParetoArchive::from_entries(std::span<const ArchiveEntry> entries) {
    ParetoArchive a;
    for (const auto& e : entries) a.insert(e);
    return a;
}

std::vector<ArchiveEntry> nondominated_filter(std::span<const ArchiveEntry> entries) {
    std::vector<ArchiveEntry> out;
    for (std::size_t i = 0; i < entries.size(); ++i) {
        bool keep = true;
        for (std::size_t j = 0; j < entries.size() && keep; ++j) {
            if (j == i) continue;
            if (dominates(entries[j].objectives, entries[i].objectives)) keep = false;
            if (j < i && entries[j].genome == entries[i].genome) keep = false;
        }
        if (keep) out.push_back(entries[i]);
    }
    return out;
}

ParetoArchive merge_archives(std::span<const ParetoArchive> archives) {
    ParetoArchive merged;
    for (const auto& a : archives) {
        for (const auto& e : a.entries()) merged.insert(e);
    }
    return merged;
}

namespace {

// Area of the union of boxes [x, rx] x [y, ry].
double union_area(std::vector<std::pair<double, double>> pts, double rx, double ry) {
    std::sort(pts.begin(), pts.end());
    double area = 0.0;
    double best_y = ry;
    for (std::size_t i = 0; i < pts.size(); ++i) {
        best_y = std::min(best_y, pts[i].second);
        const double next_x = i + 1 < pts.size() ? pts[i + 1].first : rx;
        area += (next_x - pts[i].first) * (ry - best_y);
    }
    return area;
}

}  // namespace

double hypervolume(std::span<const ObjectiveVector> points, const ObjectiveVector& reference) {
    for (const auto& p : points) {
        for (std::size_t i = 0; i < kObjectives; ++i) {
            if (!(p[i] <= reference[i])) {
                throw ValidationError("hypervolume reference point does not bound every archive member");
            }
        }
    }
    std::vector<ObjectiveVector> pts(points.begin(), points.end());
    std::sort(pts.begin(), pts.end(), [](const auto& a, const auto& b) { return a.e_pr < b.e_pr; });
    double volume = 0.0;
    std::vector<std::pair<double, double>> slice;
    for (std::size_t i = 0; i < pts.size(); ++i) {
        slice.emplace_back(pts[i].e_cv, pts[i].c);
        const double next_z = i + 1 < pts.size() ? pts[i + 1].e_pr : reference.e_pr;
        if (next_z > pts[i].e_pr) volume += (next_z - pts[i].e_pr) * union_area(slice, reference.e_cv, reference.c);
    }
    return volume;
}

double hypervolume(const ParetoArchive& archive, const ObjectiveVector& reference) {
    const auto pts = archive.objectives();
    return hypervolume(pts, reference);
}

void write_archive_jsonl(const std::filesystem::path& path, const ParetoArchive& archive,
                         const SearchSpaceConfig* space, const std::string& header) {
    std::ofstream out(path);
    if (!out) throw Error("cannot write " + path.string());
    if (!header.empty()) out << header << '\n';
    for (const auto& e : archive.sorted()) {
        nlohmann::json line = {{"genome", e.genome.to_string()}};
        line.update(e.objectives.to_json());
        if (space && e.genome.size() == space->length()) {
            const auto a = decode(e.genome, *space);
            line["architecture"] = a.to_json();
            line["summary"] = a.summary();
        }
        out << line.dump() << '\n';
    }
}

ParetoArchive read_archive_jsonl(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot read " + path.string());
    std::vector<ArchiveEntry> entries;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') continue;
        nlohmann::json j;
        try {
            j = nlohmann::json::parse(line);
        } catch (const nlohmann::json::exception& e) {
            throw ParseError(path.string() + ": " + e.what());
        }
        entries.push_back({Genome::from_string(j.at("genome").get<std::string>()), ObjectiveVector::from_json(j)});
    }
    ParetoArchive a;
    for (const auto& e : entries) a.insert(e);
    return a;
}

}  // namespace coevo
