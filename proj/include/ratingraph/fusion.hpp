#pragma once

#include <Eigen/Dense>
#include <string>
#include <unordered_map>
#include <vector>

#include "ratingraph/models.hpp"

namespace ratingraph {

inline constexpr int kImageDim = 1000;
inline constexpr int kTextDim = 256;
inline constexpr int kFusedDim = kImageDim + kTextDim + 9;

// Per-business embedding store loaded from the interchange file. Duplicate
// business ids keep the last record; duplicates and unknown ids are counted
// as warnings rather than errors.
class EmbeddingTable {
public:
    std::size_t size() const { return index_.size(); }

    // Row of length kImageDim + kTextDim, image segment first; nullptr when
    // the business has no embedding.
    const double* find(BusinessId b) const {
        const auto it = index_.find(b);
        return it == index_.end() ? nullptr : data_.data() + it->second * (kImageDim + kTextDim);
    }

    void insert(BusinessId b, const std::vector<double>& row);

    uint64_t duplicate_warnings = 0;
    uint64_t unknown_id_warnings = 0;

private:
    std::unordered_map<BusinessId, std::size_t> index_;
    std::vector<double> data_;
};

// Interchange format: header row "business_id,<image_dim>,<text_dim>" with
// the dimensions declared as 1000 and 256, then one record per business:
// id followed by 1000 image values and 256 text values. A record with the
// wrong field count raises SchemaError naming it.
EmbeddingTable load_embeddings(const std::string& path, const IdMap& ids);

// 1265-wide fused rows: [image | text | standardized graph features], with
// zero vectors for businesses missing from the table (counted in `missing`).
struct FusedMatrix {
    Eigen::MatrixXd X;  // n x 1265
    Eigen::VectorXd y;
    std::vector<std::pair<UserId, BusinessId>> pairs;
    uint64_t missing = 0;
};

FusedMatrix fuse(const FeatureMatrix& standardized, const EmbeddingTable& embeddings);

// Same network family as fit_mlp with the 1265-wide input layer
// (1265 -> 200 -> 40 -> 8 -> 5).
MlpModel fit_fused_mlp(const FusedMatrix& fused, const TrainConfig& cfg,
                       const FusedMatrix* validation = nullptr);

// Binary fused-matrix artifact for the pipeline.
void save_fused(const std::string& path, const FusedMatrix& m);
FusedMatrix load_fused(const std::string& path);

}  // namespace ratingraph
