#include "ratingraph/fusion.hpp"

#include <charconv>
#include <cstring>
#include <fstream>

namespace ratingraph {

void EmbeddingTable::insert(BusinessId b, const std::vector<double>& row) {
    if (row.size() != static_cast<std::size_t>(kImageDim + kTextDim))
        throw SchemaError("embedding row has wrong width");
    const auto it = index_.find(b);
    if (it != index_.end()) {
        ++duplicate_warnings;
        std::copy(row.begin(), row.end(), data_.begin() + static_cast<std::ptrdiff_t>(it->second * row.size()));
        return;
    }
    index_.emplace(b, index_.size());
    data_.insert(data_.end(), row.begin(), row.end());
}

EmbeddingTable load_embeddings(const std::string& path, const IdMap& ids) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path);

    std::string line;
    if (!std::getline(in, line)) throw SchemaError(path + ": empty file, expected header");
    if (!line.empty() && line.back() == '\r') line.pop_back();
    {
        int image_dim = 0, text_dim = 0;
        char label[32];
        if (std::sscanf(line.c_str(), "%31[^,],%d,%d", label, &image_dim, &text_dim) != 3 ||
            std::strcmp(label, "business_id") != 0)
            throw SchemaError(path + ": bad header '" + line + "'");
        if (image_dim != kImageDim || text_dim != kTextDim)
            throw SchemaError(path + ": declared dimensions " + std::to_string(image_dim) + "+" +
                              std::to_string(text_dim) + ", expected 1000+256");
    }

    EmbeddingTable table;
    std::vector<double> row;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;

        const std::size_t id_end = line.find(',');
        if (id_end == std::string::npos)
            throw SchemaError(path + ": record without values at line " + std::to_string(line_no));
        const std::string business = line.substr(0, id_end);

        row.clear();
        const char* p = line.c_str() + id_end + 1;
        const char* end = line.c_str() + line.size();
        while (p <= end) {
            const char* field_end = static_cast<const char*>(std::memchr(p, ',', static_cast<std::size_t>(end - p)));
            if (field_end == nullptr) field_end = end;
            double v = 0.0;
            const auto [ptr, ec] = std::from_chars(p, field_end, v);
            if (ec != std::errc() || ptr != field_end)
                throw SchemaError(path + ": bad value in record '" + business + "' at line " +
                                  std::to_string(line_no));
            row.push_back(v);
            if (field_end == end) break;
            p = field_end + 1;
        }
        if (row.size() != static_cast<std::size_t>(kImageDim + kTextDim))
            throw SchemaError(path + ": record '" + business + "' has " + std::to_string(row.size()) +
                              " values, expected " + std::to_string(kImageDim + kTextDim));

        const auto b = ids.find_business(business);
        if (!b) {
            ++table.unknown_id_warnings;
            continue;
        }
        table.insert(*b, row);
    }
    return table;
}

FusedMatrix fuse(const FeatureMatrix& standardized, const EmbeddingTable& embeddings) {
    FusedMatrix out;
    const auto n = static_cast<Eigen::Index>(standardized.size());
    out.X = Eigen::MatrixXd::Zero(n, kFusedDim);
    out.y.resize(n);
    out.pairs.reserve(standardized.size());
    for (Eigen::Index i = 0; i < n; ++i) {
        const FeatureRow& r = standardized.rows[static_cast<std::size_t>(i)];
        out.pairs.emplace_back(r.user, r.business);
        out.y(i) = r.target;
        if (const double* emb = embeddings.find(r.business)) {
            for (int j = 0; j < kImageDim + kTextDim; ++j) out.X(i, j) = emb[j];
        } else {
            ++out.missing;
        }
        for (int j = 0; j < 9; ++j) out.X(i, kImageDim + kTextDim + j) = r.features[static_cast<std::size_t>(j)];
    }
    return out;
}

MlpModel fit_fused_mlp(const FusedMatrix& fused, const TrainConfig& cfg,
                       const FusedMatrix* validation) {
    if (fused.X.cols() != kFusedDim)
        throw ShapeError("fused matrix must be " + std::to_string(kFusedDim) + " wide");
    if (validation != nullptr)
        return fit_mlp(fused.X, fused.y, cfg, &validation->X, &validation->y);
    return fit_mlp(fused.X, fused.y, cfg);
}

namespace {
constexpr char kFusedMagic[] = "RGFUSED1";
}

void save_fused(const std::string& path, const FusedMatrix& m) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write " + path);
    out.write(kFusedMagic, sizeof(kFusedMagic) - 1);
    const uint64_t n = static_cast<uint64_t>(m.X.rows());
    const uint64_t missing = m.missing;
    out.write(reinterpret_cast<const char*>(&n), sizeof n);
    out.write(reinterpret_cast<const char*>(&missing), sizeof missing);
    for (const auto& [u, b] : m.pairs) {
        out.write(reinterpret_cast<const char*>(&u), sizeof u);
        out.write(reinterpret_cast<const char*>(&b), sizeof b);
    }
    out.write(reinterpret_cast<const char*>(m.X.data()),
              static_cast<std::streamsize>(sizeof(double) * static_cast<std::size_t>(m.X.size())));
    out.write(reinterpret_cast<const char*>(m.y.data()),
              static_cast<std::streamsize>(sizeof(double) * static_cast<std::size_t>(m.y.size())));
    if (!out) throw IoError("write failed: " + path);
}

FusedMatrix load_fused(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path);
    char magic[sizeof(kFusedMagic) - 1];
    in.read(magic, sizeof magic);
    if (!in || std::memcmp(magic, kFusedMagic, sizeof magic) != 0)
        throw DependencyError(path + ": not a ratingraph fused-matrix file");

    FusedMatrix m;
    uint64_t n = 0;
    in.read(reinterpret_cast<char*>(&n), sizeof n);
    in.read(reinterpret_cast<char*>(&m.missing), sizeof m.missing);
    m.pairs.resize(n);
    for (auto& [u, b] : m.pairs) {
        in.read(reinterpret_cast<char*>(&u), sizeof u);
        in.read(reinterpret_cast<char*>(&b), sizeof b);
    }
    m.X.resize(static_cast<Eigen::Index>(n), kFusedDim);
    m.y.resize(static_cast<Eigen::Index>(n));
    in.read(reinterpret_cast<char*>(m.X.data()),
            static_cast<std::streamsize>(sizeof(double) * static_cast<std::size_t>(m.X.size())));
    in.read(reinterpret_cast<char*>(m.y.data()),
            static_cast<std::streamsize>(sizeof(double) * static_cast<std::size_t>(m.y.size())));
    if (!in) throw SchemaError(path + ": truncated fused-matrix file");
    return m;
}

}  // namespace ratingraph
