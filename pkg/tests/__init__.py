# Tests package for kreiss-lab
