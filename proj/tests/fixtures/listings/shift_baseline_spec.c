/*@ 
  @ ensures 0 <= \result <= 5;
  @ ensures \result == ((a >> 1 >= -4) + (a >> 1 <= 4) + (a >> 1 > -2) + (a >> 1 <= 0) + (a == -1));
*/
int testme(int a){
  int result = 0;
  if ((a >> 1) >= -4)
    result++;
  if ((a >> 1) <= 4)
    result++;
  if ((a >> 1) > -2)
    result++;
  if ((a >> 1) <= 0)
    result++;
  if (a == -1)
    result++;
  return result;
}
