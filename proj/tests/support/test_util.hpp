#pragma once

#include "tactskin/heatmap.hpp"
#include "tactskin/mesh.hpp"
#include "tactskin/sampler.hpp"

#include <filesystem>
#include <memory>
#include <random>
#include <string>

namespace testutil {

inline std::filesystem::path fixture_dir() { return TACTSKIN_FIXTURE_DIR; }

/// Fresh, empty directory under the system temp dir.
inline std::filesystem::path scratch_dir(const std::string& name) {
    const auto dir = std::filesystem::temp_directory_path() / ("tactskin_test_" + name);
    std::filesystem::remove_all(dir);
    std::filesystem::create_directories(dir);
    return dir;
}

inline std::shared_ptr<const tactskin::TriMesh> share(tactskin::TriMesh m) {
    return std::make_shared<const tactskin::TriMesh>(std::move(m));
}

/// Layout from bare positions; ids follow the order given.
inline tactskin::NoduleLayout layout_at(const std::vector<tactskin::Vec3>& points,
                                        tactskin::SamplingParams params = {}) {
    tactskin::NoduleLayout l;
    l.params = params;
    for (std::size_t i = 0; i < points.size(); ++i) {
        tactskin::Nodule n;
        n.id = static_cast<std::uint32_t>(i);
        n.position = points[i];
        n.local_weight = 1.0;
        n.radius = 0.001;
        l.nodules.push_back(n);
    }
    return l;
}

} // namespace testutil
