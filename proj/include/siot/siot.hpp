#pragma once

#include "siot/cluster.hpp"
#include "siot/csv.hpp"
#include "siot/error.hpp"
#include "siot/gnn.hpp"
#include "siot/graph.hpp"
#include "siot/ingest.hpp"
#include "siot/metrics.hpp"
#include "siot/partition.hpp"
#include "siot/pipeline.hpp"
#include "siot/random.hpp"
#include "siot/stages.hpp"
#include "siot/tsne.hpp"
