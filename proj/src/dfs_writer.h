//
// Project g2t - Copyright 2026 The g2t Authors.
// SPDX-License-Identifier: Apache-2.0
//

#ifndef G2T_SRC_DFS_WRITER_H_
#define G2T_SRC_DFS_WRITER_H_

#include <array>
#include <span>
#include <string>

#include "g2t/molgraph.h"

namespace g2t::internal {

// Kekulé SMILES of a depth-first traversal rooted at the lowest-ranked atom,
// visiting neighbors in ascending rank. Ring-closure bond symbols are written
// on the closing side only.
std::string write_dfs_smiles(const MolGraph &graph, std::span<const int> ranks);

}  // namespace g2t::internal

#endif  // G2T_SRC_DFS_WRITER_H_
