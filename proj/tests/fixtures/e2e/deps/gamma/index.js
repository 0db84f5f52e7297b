module.exports = function () {
  return 'gamma';
};
