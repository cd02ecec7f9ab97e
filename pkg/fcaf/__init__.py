# fcaf package
