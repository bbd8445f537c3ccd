#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "ratingraph/errors.hpp"

namespace ratingraph {

// Dense integer handles for the two node sides.
using UserId = uint32_t;
using BusinessId = uint32_t;

// One user -> business review. Handles come from an IdMap.
struct ReviewEdge {
    UserId user = 0;
    BusinessId business = 0;
    int32_t stars = 0;     // 1..5
    int64_t timestamp = 0; // seconds since epoch, UTC

    friend bool operator==(const ReviewEdge&, const ReviewEdge&) = default;
};

// Interns opaque string ids to dense handles, one namespace per side.
// Handles are assigned in first-seen order, so parsing the same input in the
// same order always reproduces the same mapping.
class IdMap {
public:
    UserId intern_user(const std::string& s) {
        auto it = user_ids_.find(s);
        if (it != user_ids_.end()) return it->second;
        const UserId id = static_cast<UserId>(user_strings_.size());
        user_ids_.emplace(s, id);
        user_strings_.push_back(s);
        return id;
    }

    BusinessId intern_business(const std::string& s) {
        auto it = business_ids_.find(s);
        if (it != business_ids_.end()) return it->second;
        const BusinessId id = static_cast<BusinessId>(business_strings_.size());
        business_ids_.emplace(s, id);
        business_strings_.push_back(s);
        return id;
    }

    std::optional<UserId> find_user(const std::string& s) const {
        auto it = user_ids_.find(s);
        if (it == user_ids_.end()) return std::nullopt;
        return it->second;
    }

    std::optional<BusinessId> find_business(const std::string& s) const {
        auto it = business_ids_.find(s);
        if (it == business_ids_.end()) return std::nullopt;
        return it->second;
    }

    const std::string& user_string(UserId id) const {
        if (id >= user_strings_.size())
            throw NodeNotFoundError("unknown user handle " + std::to_string(id));
        return user_strings_[id];
    }

    const std::string& business_string(BusinessId id) const {
        if (id >= business_strings_.size())
            throw NodeNotFoundError("unknown business handle " + std::to_string(id));
        return business_strings_[id];
    }

    std::size_t num_users() const { return user_strings_.size(); }
    std::size_t num_businesses() const { return business_strings_.size(); }

private:
    std::unordered_map<std::string, UserId> user_ids_;
    std::unordered_map<std::string, BusinessId> business_ids_;
    std::vector<std::string> user_strings_;
    std::vector<std::string> business_strings_;
};

}  // namespace ratingraph
