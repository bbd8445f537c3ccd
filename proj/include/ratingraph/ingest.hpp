#pragma once

#include <span>
#include <string>
#include <vector>

#include "ratingraph/edge.hpp"

namespace ratingraph {

struct CivilDateTime {
    int year = 1970;
    int month = 1;
    int day = 1;
    int hour = 0;
    int minute = 0;
    int second = 0;
};

// Proleptic Gregorian calendar <-> unix time, all UTC. Dates without a time
// component are midnight UTC.
int64_t timestamp_from_civil(const CivilDateTime& c);
CivilDateTime civil_from_timestamp(int64_t ts);

// Accepts "YYYY-MM-DD" or "YYYY-MM-DD HH:MM:SS"; throws ValidationError.
int64_t parse_datetime(const std::string& s);

// One record, either a JSON object (Yelp review schema: user_id, business_id,
// stars, date) or a CSV interchange row (user_id,business_id,stars,unix_ts).
// String ids are interned through `ids` unless lookup_only is set, in which
// case unseen ids raise ValidationError.
ReviewEdge parse_review_line(const std::string& line, IdMap& ids,
                             std::size_t line_no = 0, bool lookup_only = false);

// Keeps exactly the edges with timestamp >= cutoff, order preserved.
std::vector<ReviewEdge> filter_by_date(std::span<const ReviewEdge> edges, int64_t cutoff);

// Collapses duplicate (user, business) pairs to the edge with the latest
// timestamp; timestamp ties keep the last one in input order. Survivors stay
// in the input order of their first occurrence.
std::vector<ReviewEdge> dedupe_edges(std::span<const ReviewEdge> edges);

// Canonical order used downstream: (timestamp, user, business).
void sort_edges(std::vector<ReviewEdge>& edges);

// CSV interchange, header "user_id,business_id,stars,unix_ts".
std::vector<ReviewEdge> read_edges_csv(const std::string& path, IdMap& ids,
                                       bool lookup_only = false);
void write_edges_csv(const std::string& path, std::span<const ReviewEdge> edges,
                     const IdMap& ids);

// JSON-lines review file (one object per line; blank lines ignored).
std::vector<ReviewEdge> read_reviews_json(const std::string& path, IdMap& ids);

// Id-map file, header "kind,string_id,int_id"; loading it then parsing the
// matching edge file reproduces the exact handles of the run that wrote it.
void save_idmap(const std::string& path, const IdMap& ids);
IdMap load_idmap(const std::string& path);

}  // namespace ratingraph
