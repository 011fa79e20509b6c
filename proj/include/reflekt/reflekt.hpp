#pragma once

#include "reflekt/errors.hpp"
#include "reflekt/linalg.hpp"
#include "reflekt/root_system.hpp"
#include "reflekt/group.hpp"
#include "reflekt/chamber.hpp"
#include "reflekt/projection.hpp"
#include "reflekt/sparse.hpp"
#include "reflekt/functions.hpp"
#include "reflekt/variational.hpp"
#include "reflekt/sparse_recovery.hpp"
#include "reflekt/harness.hpp"
#include "reflekt/io.hpp"
