#pragma once

#include <string>
#include <vector>

#include "dvem/types.hpp"

namespace dvem {

/// Everything the pipeline needs for one query: the query frame plus its
/// ranked candidate list and the verified correspondences into it.
struct QueryData {
  QueryMeta meta;
  std::vector<ImageMeta> images;  // sorted by retrieval_rank ascending
  std::vector<CorrespondenceRecord> correspondences;
};

struct Dataset {
  std::vector<QueryData> queries;
};

}  // namespace dvem
