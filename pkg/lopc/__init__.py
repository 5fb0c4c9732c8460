# LOPC secret-correlation toolkit
