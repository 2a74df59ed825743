#include "smp/data.hpp"

#include <algorithm>
#include <stdexcept>
#include <unordered_set>

namespace smp {

const char* const kProfileCounterNames[kProfileCounterCount] = {
    "follower",  "following", "totalViews",     "totalFaves",
    "totalInGroup", "totalTags", "totalGeotagged", "totalImages"};

std::optional<double>& UserProfile::counter(std::size_t i) {
    switch (i) {
        case 0: return follower;
        case 1: return following;
        case 2: return total_views;
        case 3: return total_faves;
        case 4: return total_in_group;
        case 5: return total_tags;
        case 6: return total_geotagged;
        case 7: return total_images;
    }
    throw std::out_of_range("UserProfile::counter");
}

const std::optional<double>& UserProfile::counter(std::size_t i) const {
    return const_cast<UserProfile*>(this)->counter(i);
}

std::size_t Dataset::block_index(const std::string& name) const {
    for (std::size_t i = 0; i < blocks.size(); ++i)
        if (blocks[i].name == name) return i;
    return static_cast<std::size_t>(-1);
}

Dataset join_dataset(std::vector<PostRecord> posts,
                     std::unordered_map<std::string, UserProfile> profiles,
                     std::vector<EmbeddingBlock> blocks) {
    std::unordered_set<std::uint64_t> known_pids;
    known_pids.reserve(posts.size());
    for (const auto& p : posts) known_pids.insert(p.pid);

    for (const auto& block : blocks)
        for (const auto& [pid, vec] : block.rows) {
            if (!known_pids.count(pid))
                throw std::runtime_error("join_dataset: block '" + block.name +
                                         "' has row for pid " + std::to_string(pid) +
                                         " which appears in no post");
            if (vec.size() != block.dim)
                throw std::runtime_error("join_dataset: block '" + block.name + "' row for pid " +
                                         std::to_string(pid) + " has length " +
                                         std::to_string(vec.size()) + ", expected " +
                                         std::to_string(block.dim));
        }

    Dataset ds;
    ds.posts = std::move(posts);
    ds.profiles = std::move(profiles);
    ds.blocks = std::move(blocks);

    ds.profile_missing.resize(ds.posts.size(), 0);
    for (std::size_t i = 0; i < ds.posts.size(); ++i)
        if (!ds.profiles.count(ds.posts[i].uid)) ds.profile_missing[i] = 1;

    ds.embedding_missing.resize(ds.blocks.size());
    for (std::size_t b = 0; b < ds.blocks.size(); ++b) {
        ds.embedding_missing[b].resize(ds.posts.size(), 0);
        for (std::size_t i = 0; i < ds.posts.size(); ++i)
            if (!ds.blocks[b].rows.count(ds.posts[i].pid)) ds.embedding_missing[b][i] = 1;
    }
    return ds;
}

double median_of(std::vector<double> values) {
    if (values.empty()) return 0.0;
    std::sort(values.begin(), values.end());
    const std::size_t n = values.size();
    if (n % 2 == 1) return values[n / 2];
    return 0.5 * (values[n / 2 - 1] + values[n / 2]);
}

namespace {

ImputeStats fit_impute_stats(const Dataset& ds) {
    ImputeStats stats;
    std::vector<double> col;

    col.clear();
    for (const auto& p : ds.posts)
        if (p.geoaccuracy) col.push_back(*p.geoaccuracy);
    stats.medians["geoaccuracy"] = median_of(col);

    for (std::size_t c = 0; c < kProfileCounterCount; ++c) {
        col.clear();
        for (std::size_t i = 0; i < ds.posts.size(); ++i) {
            auto it = ds.profiles.find(ds.posts[i].uid);
            if (it == ds.profiles.end()) continue;
            const auto& v = it->second.counter(c);
            if (v) col.push_back(*v);
        }
        stats.medians[kProfileCounterNames[c]] = median_of(col);
    }

    stats.fitted = true;
    return stats;
}

void fill_categorical(std::optional<std::string>& field) {
    if (!field) field = "unknown";
}

}  // namespace

std::pair<Dataset, ImputeStats> impute_missing(Dataset ds, ImputeStats stats) {
    if (!ds.joined())
        throw std::runtime_error("impute_missing: dataset must come from join_dataset");

    if (!stats.fitted) stats = fit_impute_stats(ds);

    auto median_for = [&](const char* name) {
        auto it = stats.medians.find(name);
        if (it == stats.medians.end())
            throw std::runtime_error(std::string("impute_missing: no fitted statistic for column '") +
                                     name + "'");
        return it->second;
    };

    const double geo_acc_median = median_for("geoaccuracy");
    double counter_medians[kProfileCounterCount];
    for (std::size_t c = 0; c < kProfileCounterCount; ++c)
        counter_medians[c] = median_for(kProfileCounterNames[c]);

    for (auto& p : ds.posts) {
        if (!p.geoaccuracy) p.geoaccuracy = geo_acc_median;
        fill_categorical(p.category);
        fill_categorical(p.subcategory);
        fill_categorical(p.concept_tag);
        fill_categorical(p.mediatype);
        // ispublic is categorical by routing; missing stays missing here and
        // is mapped to the "unknown" one-hot slot at transform time
    }

    // posts whose uid has no profile row get a synthetic all-median profile;
    // the profile_missing flag (already set at join) carries the signal
    for (std::size_t i = 0; i < ds.posts.size(); ++i) {
        const std::string& uid = ds.posts[i].uid;
        auto it = ds.profiles.find(uid);
        if (it == ds.profiles.end()) {
            UserProfile prof;
            prof.uid = uid;
            for (std::size_t c = 0; c < kProfileCounterCount; ++c)
                prof.counter(c) = counter_medians[c];
            ds.profiles.emplace(uid, std::move(prof));
        }
    }
    for (auto& [uid, prof] : ds.profiles)
        for (std::size_t c = 0; c < kProfileCounterCount; ++c)
            if (!prof.counter(c)) prof.counter(c) = counter_medians[c];

    // absent embedding rows become zero vectors; indicator flags stay as set
    // by join_dataset
    for (std::size_t b = 0; b < ds.blocks.size(); ++b) {
        auto& block = ds.blocks[b];
        for (std::size_t i = 0; i < ds.posts.size(); ++i) {
            const std::uint64_t pid = ds.posts[i].pid;
            if (!block.rows.count(pid)) block.rows.emplace(pid, std::vector<float>(block.dim, 0.0f));
        }
    }

    return {std::move(ds), std::move(stats)};
}

}  // namespace smp
