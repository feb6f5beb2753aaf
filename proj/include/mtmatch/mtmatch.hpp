#ifndef MTMATCH_MTMATCH_HPP
#define MTMATCH_MTMATCH_HPP

#include "mtmatch/ann_index.hpp"
#include "mtmatch/bench.hpp"
#include "mtmatch/config.hpp"
#include "mtmatch/core.hpp"
#include "mtmatch/embedding.hpp"
#include "mtmatch/evaluation.hpp"
#include "mtmatch/io.hpp"
#include "mtmatch/merging.hpp"
#include "mtmatch/pipeline.hpp"
#include "mtmatch/pruning.hpp"
#include "mtmatch/synthetic.hpp"

#endif
