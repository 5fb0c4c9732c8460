# Distribution and protocol files
