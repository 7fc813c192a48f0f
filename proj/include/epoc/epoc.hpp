#ifndef EPOC_EPOC_HPP
#define EPOC_EPOC_HPP

#include "epoc/bench.hpp"
#include "epoc/embedding.hpp"
#include "epoc/error.hpp"
#include "epoc/io.hpp"
#include "epoc/metrics.hpp"
#include "epoc/morphology.hpp"
#include "epoc/patch.hpp"
#include "epoc/raster.hpp"
#include "epoc/slic.hpp"
#include "epoc/tokenizer.hpp"
#include "epoc/tokens.hpp"
#include "epoc/visualize.hpp"
#include "epoc/watershed.hpp"

#endif  // EPOC_EPOC_HPP
