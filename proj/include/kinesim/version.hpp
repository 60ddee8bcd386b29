#pragma once

#define KINESIM_VERSION "0.1.0"
